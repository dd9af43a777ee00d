import { ApiError, PortalApi } from "./api.js";
import { renderBeacon, renderMission, renderPasses, setLinkDown } from "./dashboard.js";
import { wireLoginForm } from "./login.js";
import { startPoll, type PollHandle } from "./poll.js";
import { clearToken, loadToken, saveToken } from "./session.js";
import { PASSES_POLL_S, TELEMETRY_POLL_S } from "./viewmodel.js";

const api = new PortalApi();
let polls: PollHandle[] = [];

function show(id: "login-view" | "dash-view"): void {
  (document.getElementById("login-view") as HTMLElement).hidden = id !== "login-view";
  (document.getElementById("dash-view") as HTMLElement).hidden = id !== "dash-view";
  (document.getElementById("signout") as HTMLElement).hidden = id !== "dash-view";
}

function signOut(): void {
  for (const p of polls) p.stop();
  polls = [];
  clearToken();
  setLinkDown(document, false);
  show("login-view");
}

// A failed poll means the gateway is unreachable; a 401 means the token
// aged out server-side. Only the latter ends the session.
function onPollError(err: unknown): void {
  if (err instanceof ApiError && err.status === 401) {
    signOut();
    return;
  }
  setLinkDown(document, true);
}

function enterDashboard(token: string): void {
  show("dash-view");
  polls.push(
    startPoll(
      async () => renderBeacon(document, await api.telemetry(token)),
      TELEMETRY_POLL_S * 1000,
      onPollError,
      () => setLinkDown(document, false),
    ),
    startPoll(
      async () => renderPasses(document, await api.passes(24, token)),
      PASSES_POLL_S * 1000,
      onPollError,
      () => setLinkDown(document, false),
    ),
  );
}

export function boot(): void {
  api
    .mission()
    .then((info) => renderMission(document, info))
    .catch(() => setLinkDown(document, true));

  wireLoginForm(document, api, (token) => {
    saveToken(token);
    enterDashboard(token);
  });

  document.getElementById("signout")?.addEventListener("click", signOut);

  const token = loadToken();
  if (token) {
    enterDashboard(token);
  } else {
    show("login-view");
  }
}

boot();
