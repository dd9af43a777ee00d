import { beforeEach, describe, expect, it, vi } from "vitest";
import type { PortalApi } from "../src/api.js";
import { EMPTY_FORM, GENERIC_FAILURE, LINK_FAILURE, wireLoginForm } from "../src/login.js";
import { loadShell } from "./shell.js";

function submit() {
  (document.getElementById("login-form") as HTMLFormElement).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

function fill(username: string, password: string) {
  (document.getElementById("username") as HTMLInputElement).value = username;
  (document.getElementById("password") as HTMLInputElement).value = password;
}

function errorEl(): HTMLElement {
  return document.getElementById("login-error") as HTMLElement;
}

let login: ReturnType<typeof vi.fn>;
let onSuccess: ReturnType<typeof vi.fn>;

beforeEach(() => {
  loadShell();
  login = vi.fn();
  onSuccess = vi.fn();
  wireLoginForm(document, { login } as unknown as PortalApi, onSuccess);
});

describe("wireLoginForm", () => {
  it("blocks an empty form without calling the API", () => {
    fill("", "");
    submit();
    expect(login).not.toHaveBeenCalled();
    expect(errorEl().hidden).toBe(false);
    expect(errorEl().textContent).toBe(EMPTY_FORM);
  });

  it("shows one generic message for rejected credentials", async () => {
    login.mockResolvedValue({ ok: false, error: "invalid credentials" });
    fill("admin", "wrong");
    submit();
    await vi.waitFor(() => expect(errorEl().hidden).toBe(false));
    expect(errorEl().textContent).toBe(GENERIC_FAILURE);
    expect(errorEl().textContent).not.toContain("password");
    expect(onSuccess).not.toHaveBeenCalled();
  });

  it("hands the token to the success callback", async () => {
    login.mockResolvedValue({ ok: true, token: "tok456" });
    fill("admin", "admin");
    submit();
    await vi.waitFor(() => expect(onSuccess).toHaveBeenCalledWith("tok456"));
    expect(login).toHaveBeenCalledWith("admin", "admin");
    expect((document.getElementById("password") as HTMLInputElement).value).toBe("");
  });

  it("reports an unreachable gateway distinctly from bad credentials", async () => {
    login.mockRejectedValue(new TypeError("refused"));
    fill("admin", "admin");
    submit();
    await vi.waitFor(() => expect(errorEl().hidden).toBe(false));
    expect(errorEl().textContent).toBe(LINK_FAILURE);
  });
});
