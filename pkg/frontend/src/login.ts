import type { PortalApi } from "./api.js";

// One generic message for any rejected credential pair. The server does not
// distinguish unknown user from wrong password and neither do we.
export const GENERIC_FAILURE = "Sign-in failed.";
export const EMPTY_FORM = "Enter a username and password.";
export const LINK_FAILURE = "Link unavailable. Try again.";

export function wireLoginForm(
  doc: Document,
  api: PortalApi,
  onSuccess: (token: string) => void,
): void {
  const form = doc.getElementById("login-form") as HTMLFormElement;
  const username = doc.getElementById("username") as HTMLInputElement;
  const password = doc.getElementById("password") as HTMLInputElement;
  const error = doc.getElementById("login-error") as HTMLElement;

  const showError = (text: string) => {
    error.textContent = text;
    error.hidden = false;
  };

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    error.hidden = true;
    if (!username.value.trim() || !password.value) {
      showError(EMPTY_FORM);
      return;
    }
    api
      .login(username.value.trim(), password.value)
      .then((result) => {
        if (result.ok && result.token) {
          password.value = "";
          onSuccess(result.token);
        } else {
          showError(GENERIC_FAILURE);
        }
      })
      .catch(() => showError(LINK_FAILURE));
  });
}
