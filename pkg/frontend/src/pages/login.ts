import { ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import { AppContext } from "../context.js";

export function renderLogin(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  const error = el("p", { class: "error", id: "login-error" });
  const username = el("input", { id: "username", name: "username", placeholder: "username" });
  const password = el("input", {
    id: "password",
    name: "password",
    type: "password",
    placeholder: "password",
  });

  const submit = async (register: boolean) => {
    error.textContent = "";
    try {
      if (register) {
        await ctx.api.register(username.value, password.value);
      }
      await ctx.api.login(username.value, password.value);
      ctx.state.session = true;
      ctx.navigate("#/upload");
    } catch (e) {
      error.textContent = e instanceof ApiError ? e.detail : String(e);
    }
  };

  root.append(
    el("h1", {}, "Sign in"),
    el(
      "form",
      { onsubmit: ((e: Event) => e.preventDefault()) as EventListener },
      username,
      password,
      el("button", { id: "login", type: "button", onclick: () => void submit(false) }, "Log in"),
      el(
        "button",
        { id: "register", type: "button", onclick: () => void submit(true) },
        "Register",
      ),
    ),
    error,
  );
}
