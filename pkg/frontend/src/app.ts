import { ApiClient, ApiError } from "./api.js";
import { layoutNet } from "./layout.js";
import type { NetLayout } from "./layout.js";
import { buildViewModel, panelEntry } from "./model.js";
import type { PanelEntry } from "./model.js";
import { renderBanner, renderDebugPanel, renderNet, renderPanel } from "./render.js";
import type { FiringReport, NetInfo, SessionState } from "./types.js";

export interface AppElements {
  net: HTMLElement;
  panel: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
  debug?: HTMLElement;
}

export interface StartOptions {
  model: string;
  bindings?: string;
  sut?: string;
}

/**
 * One session view. The server stays authoritative: clicks only ever target
 * transitions the latest fetched state reports enabled, one at a time.
 */
export class AppController {
  private sessionId = "";
  private net: NetInfo | null = null;
  private layout: NetLayout | null = null;
  private state: SessionState | null = null;
  private entries: PanelEntry[] = [];
  private inFlight = false;
  private events: EventSource | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly el: AppElements,
  ) {}

  async start(options: StartOptions): Promise<void> {
    this.stopEvents();
    this.net = await this.api.getNet(options.model);
    this.layout = layoutNet(this.net);
    const handle = await this.api.createSession({
      model: options.model,
      bindings: options.bindings,
      sut: options.sut,
    });
    this.sessionId = handle.session_id;
    this.state = handle.state;
    this.entries = [];
    this.events = this.api.openEvents(this.sessionId, (report) =>
      this.onEvent(report),
    );
    this.note(`session ${this.sessionId} started`);
    this.render();
  }

  get panelEntries(): readonly PanelEntry[] {
    return this.entries;
  }

  get currentState(): SessionState | null {
    return this.state;
  }

  get session(): string {
    return this.sessionId;
  }

  /** Panel entries come from the event stream only, so nothing is double-counted. */
  private onEvent(report: FiringReport): void {
    this.entries = [...this.entries, panelEntry(report)];
    renderPanel(this.el.panel, this.entries);
    if (this.el.debug) {
      renderDebugPanel(this.el.debug, this.entries[this.entries.length - 1]);
    }
  }

  async onTransitionClick(transition: string): Promise<void> {
    if (this.inFlight || !this.state) return;
    if (!this.state.enabled.some((e) => e.id === transition)) return;
    this.inFlight = true;
    this.render(); // optimistic: nothing is clickable while a fire is in flight
    try {
      const report = await this.api.fire(this.sessionId, transition);
      if (report.advanced && this.state) {
        // tokens move immediately from the report; enablement refreshes below
        this.state = { ...this.state, marking: report.marking_after };
        this.render();
      } else {
        this.flashBlocked(transition);
      }
      this.state = await this.api.getState(this.sessionId);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // someone else advanced this session; trust the server
        this.state = await this.api.getState(this.sessionId);
        this.note("state was stale, refreshed");
      } else {
        this.note(`error: ${(error as Error).message}`);
      }
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  async reset(): Promise<void> {
    if (!this.sessionId) return;
    const { state } = await this.api.reset(this.sessionId);
    this.state = state;
    this.entries = [];
    renderPanel(this.el.panel, this.entries);
    if (this.el.debug) renderDebugPanel(this.el.debug, undefined);
    this.note("session reset");
    this.render();
  }

  stopEvents(): void {
    this.events?.close();
    this.events = null;
  }

  private flashBlocked(transition: string): void {
    const node = this.el.net.querySelector(`[data-id="${transition}"]`);
    node?.classList.add("shake");
  }

  private note(text: string): void {
    this.el.status.textContent = text;
  }

  render(): void {
    if (!this.net || !this.layout || !this.state) return;
    const effectiveState = this.inFlight
      ? { ...this.state, enabled: [] }
      : this.state;
    const vm = buildViewModel(this.net, this.layout, effectiveState);
    renderNet(this.el.net, vm, (id) => void this.onTransitionClick(id));
    renderBanner(this.el.banner, !this.inFlight && vm.completed);
  }
}

/** Entry point for the real page; tests drive AppController directly. */
export async function bootstrap(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "http://127.0.0.1:8000");
  const el: AppElements = {
    net: document.getElementById("net")!,
    panel: document.getElementById("panel")!,
    banner: document.getElementById("banner")!,
    status: document.getElementById("status")!,
    debug: document.getElementById("debug") ?? undefined,
  };
  const controller = new AppController(api, el);

  const listing = await api.listModels();
  const select = document.getElementById("model") as HTMLSelectElement;
  for (const model of listing.models) {
    const option = document.createElement("option");
    option.value = model;
    option.textContent = model;
    select.appendChild(option);
  }
  const stemFor = (model: string, names: string[], suffix: string) => {
    const stem = model.replace(/\.pnml$/, "");
    return names.find((n) => n === `${stem}${suffix}`);
  };
  const begin = () => {
    const model = select.value;
    void controller.start({
      model,
      bindings: stemFor(model, listing.bindings, ".bindings.json"),
      sut: stemFor(model, listing.suts, ".sut.json"),
    });
  };
  document.getElementById("start")!.addEventListener("click", begin);
  document
    .getElementById("reset")!
    .addEventListener("click", () => void controller.reset());
  if (listing.models.length > 0) begin();
}

declare global {
  interface Window {
    flowstepsBootstrapped?: boolean;
  }
}

if (typeof document !== "undefined" && document.getElementById("net")) {
  window.flowstepsBootstrapped = true;
  void bootstrap();
}
