// Verified-representative session: the token lives in sessionStorage so a
// tab close ends the session; logout clears it explicitly.

export interface Session {
  token: string;
  companyId: string;
}

const KEY = "suppliergraph.session";

function storage(): Storage | null {
  try {
    return typeof sessionStorage !== "undefined" ? sessionStorage : null;
  } catch {
    return null;
  }
}

let memoryFallback: Session | null = null;

export function loadSession(): Session | null {
  const store = storage();
  if (!store) return memoryFallback;
  const raw = store.getItem(KEY);
  if (!raw) return null;
  try {
    const parsed = JSON.parse(raw) as Session;
    return parsed.token && parsed.companyId ? parsed : null;
  } catch {
    return null;
  }
}

export function saveSession(session: Session): void {
  const store = storage();
  if (store) store.setItem(KEY, JSON.stringify(session));
  else memoryFallback = session;
}

export function clearSession(): void {
  const store = storage();
  if (store) store.removeItem(KEY);
  memoryFallback = null;
}
