// Bootstrap: token login, hash routing, stats footer. All view state is
// reconstructable from the URL hash plus the API; a full refresh loses
// nothing.

import { ApiClient, ApiError } from "./api.js";
import { DetailView } from "./detail.js";
import { TriageView } from "./triage.js";

interface Session {
  token: string;
  reviewer: string;
}

const SESSION_KEY = "episurv-session";

function loadSession(storage: Storage): Session | null {
  const raw = storage.getItem(SESSION_KEY);
  if (!raw) return null;
  try {
    const parsed = JSON.parse(raw) as Session;
    return parsed.token ? parsed : null;
  } catch {
    return null;
  }
}

function today(): string {
  return new Date().toISOString().slice(0, 10);
}

type Route =
  | { kind: "day"; day: string; disease: string; state: string }
  | { kind: "cluster"; id: string };

export function parseHash(hash: string): Route {
  const [path, query = ""] = hash.replace(/^#\/?/, "").split("?");
  const params = new URLSearchParams(query);
  const segments = path.split("/").filter((s) => s);
  if (segments[0] === "cluster" && segments[1]) {
    return { kind: "cluster", id: segments[1] };
  }
  const day = segments[0] === "day" && segments[1] ? segments[1] : today();
  return {
    kind: "day",
    day,
    disease: params.get("disease") ?? "",
    state: params.get("state") ?? "",
  };
}

export function dayHash(day: string, disease = "", state = ""): string {
  const params = new URLSearchParams();
  if (disease) params.set("disease", disease);
  if (state) params.set("state", state);
  const query = params.toString();
  return `#/day/${day}${query ? `?${query}` : ""}`;
}

export class App {
  private api: ApiClient | null = null;
  private session: Session | null = null;
  private triage: TriageView | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly storage: Storage,
    private readonly baseUrl: string,
    private readonly navigate: (hash: string) => void,
  ) {}

  start(hash: string): void {
    this.session = loadSession(this.storage);
    if (!this.session) {
      this.renderLogin();
      return;
    }
    this.api = new ApiClient(this.baseUrl, this.session.token);
    void this.route(hash);
  }

  async route(hash: string): Promise<void> {
    if (!this.api || !this.session) {
      this.renderLogin();
      return;
    }
    const route = parseHash(hash);
    this.triage = null;
    if (route.kind === "cluster") {
      const view = new DetailView(this.root, this.api, this.session.reviewer, route.id, () => {
        this.navigate(dayHash(today()));
      });
      await view.load();
      return;
    }
    this.triage = new TriageView(
      this.root,
      this.api,
      this.session.reviewer,
      route.day,
      { disease: route.disease || undefined, state: route.state || undefined },
      (id) => this.navigate(`#/cluster/${id}`),
      (day, disease, state) => this.navigate(dayHash(day, disease, state)),
    );
    await this.triage.load();
  }

  handleKey(event: KeyboardEvent): void {
    if (event.target instanceof HTMLInputElement) return; // typing in a filter
    this.triage?.handleKey(event.key);
  }

  renderLogin(message = ""): void {
    this.root.innerHTML = `
      <section class="login">
        <h2>episurv review</h2>
        <p class="error" role="alert">${message}</p>
        <form class="login-form">
          <label>reviewer <input name="reviewer" required></label>
          <label>API token <input name="token" type="password" required></label>
          <button type="submit">sign in</button>
        </form>
      </section>`;
    const form = this.root.querySelector<HTMLFormElement>(".login-form");
    form?.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      void this.login(String(data.get("reviewer") || ""), String(data.get("token") || ""));
    });
  }

  async login(reviewer: string, token: string): Promise<void> {
    const candidate = new ApiClient(this.baseUrl, token);
    try {
      await candidate.stats(); // cheapest authenticated call
    } catch (error) {
      const message = error instanceof ApiError && error.status === 401
        ? "invalid token"
        : `cannot reach the API: ${String(error)}`;
      this.renderLogin(message);
      return;
    }
    this.session = { token, reviewer };
    this.storage.setItem(SESSION_KEY, JSON.stringify(this.session));
    this.api = candidate;
    this.navigate(dayHash(today())); // land on a hash so refreshes reconstruct
  }
}

export function mount(win: Window, baseUrl = ""): App {
  const root = win.document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const app = new App(root as HTMLElement, win.localStorage, baseUrl, (hash) => {
    win.location.hash = hash;
  });
  win.addEventListener("hashchange", () => void app.route(win.location.hash));
  win.document.addEventListener("keydown", (event) => app.handleKey(event));
  app.start(win.location.hash);
  return app;
}

// Automounts in the browser; test environments import mount() themselves
// into documents that gain #app only after import.
if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(window);
}
