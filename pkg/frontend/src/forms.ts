// Interaction panels: claim/verify flow, add-supplier form, CSV upload
// with per-row outcomes, and the social-norm nudge banner.

import { ApiClient, ApiError, type UploadRowOutcome } from "./api.js";
import { saveSession, type Session } from "./session.js";

function element<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function inlineError(target: HTMLElement, error: unknown): void {
  const message =
    error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  let box = target.querySelector<HTMLElement>(".inline-error");
  if (!box) {
    box = element("p", "inline-error");
    target.appendChild(box);
  }
  box.textContent = message;
}

export function renderClaimFlow(
  container: HTMLElement,
  api: ApiClient,
  companyId: string,
  onSignedIn: (session: Session) => void,
): void {
  container.replaceChildren();
  const panel = element("div", "claim-flow");
  panel.appendChild(element("h3", undefined, "Verify that you represent this company"));

  const claimForm = element("form", "claim-form");
  const email = element("input") as HTMLInputElement;
  email.type = "email";
  email.placeholder = "you@company-domain";
  email.required = true;
  const claimButton = element("button", undefined, "Send verification code");
  claimButton.type = "submit";
  claimForm.append(email, claimButton);

  const verifyForm = element("form", "verify-form hidden");
  const code = element("input") as HTMLInputElement;
  code.placeholder = "verification code";
  code.required = true;
  const verifyButton = element("button", undefined, "Verify");
  verifyButton.type = "submit";
  verifyForm.append(code, verifyButton);

  claimForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await api.claim(companyId, email.value);
      verifyForm.classList.remove("hidden");
      claimForm.insertAdjacentElement(
        "afterend",
        element("p", "claim-sent", "Verification code sent to the company outbox."),
      );
    } catch (error) {
      inlineError(panel, error);
    }
  });

  verifyForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      const result = await api.verify(code.value);
      const session = { token: result.token, companyId: result.company_id };
      saveSession(session);
      api.setToken(session.token);
      onSignedIn(session);
    } catch (error) {
      inlineError(panel, error);
    }
  });

  panel.append(claimForm, verifyForm);
  container.appendChild(panel);
}

export function renderAddSupplierForm(
  container: HTMLElement,
  api: ApiClient,
  companyId: string,
  onAdded: () => void,
  onAuthRequired: () => void,
): void {
  container.replaceChildren();
  const form = element("form", "add-supplier-form");
  const name = element("input") as HTMLInputElement;
  name.placeholder = "Supplier name";
  name.required = true;
  const button = element("button", undefined, "Add supplier");
  button.type = "submit";
  form.append(name, button);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await api.addSupplier(companyId, name.value);
      name.value = "";
      onAdded();
    } catch (error) {
      if (error instanceof ApiError && (error.status === 401 || error.status === 403)) {
        onAuthRequired();
        return;
      }
      inlineError(form, error);
    }
  });
  container.appendChild(form);
}

export function renderUploadOutcomes(target: HTMLElement, outcomes: UploadRowOutcome[]): void {
  const list = element("ul", "upload-outcomes");
  for (const outcome of outcomes) {
    const item = element(
      "li",
      `outcome-${outcome.outcome}`,
      outcome.outcome === "error"
        ? `row ${outcome.row} (${outcome.name}): ${outcome.error}`
        : `row ${outcome.row}: ${outcome.name} ${outcome.outcome}`,
    );
    list.appendChild(item);
  }
  target.replaceChildren(list);
}

export function renderUploadForm(
  container: HTMLElement,
  api: ApiClient,
  companyId: string,
  onUploaded: () => void,
  onAuthRequired: () => void,
): void {
  container.replaceChildren();
  const form = element("form", "upload-form");
  form.appendChild(element("p", undefined, "Upload a supplier list (CSV with a `name` column):"));
  const body = element("textarea") as HTMLTextAreaElement;
  body.placeholder = "name,country\nAcme Corp,US";
  body.rows = 4;
  const button = element("button", undefined, "Upload");
  button.type = "submit";
  const results = element("div", "upload-results");
  form.append(body, button);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      const response = await api.uploadSuppliers(companyId, body.value);
      renderUploadOutcomes(results, response.outcomes);
      onUploaded();
    } catch (error) {
      if (error instanceof ApiError && (error.status === 401 || error.status === 403)) {
        onAuthRequired();
        return;
      }
      inlineError(form, error);
    }
  });
  container.append(form, results);
}

export async function renderNudgeBanner(
  container: HTMLElement,
  api: ApiClient,
  session: Session | null,
): Promise<void> {
  container.replaceChildren();
  if (!session) return;
  try {
    const nudge = await api.nudge(session.companyId);
    const banner = element("div", "nudge-banner", nudge.message);
    banner.dataset.percentage = String(nudge.percentage);
    container.appendChild(banner);
  } catch {
    // the banner is best-effort; a failed fetch just leaves it out
  }
}
