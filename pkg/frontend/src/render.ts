import type { NetViewModel, PanelEntry, ViewNode } from "./model.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PLACE_RADIUS = 26;
const TRANSITION_W = 96;
const TRANSITION_H = 44;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

function shorten(label: string, max = 18): string {
  return label.length <= max ? label : label.slice(0, max - 1) + "…";
}

function renderPlace(node: ViewNode): SVGGElement {
  const group = svgEl("g", {
    class: "place" + (node.tokens > 0 ? " marked" : ""),
    "data-id": node.id,
    "data-tokens": String(node.tokens),
  });
  group.appendChild(
    svgEl("circle", {
      cx: String(node.x),
      cy: String(node.y),
      r: String(PLACE_RADIUS),
    }),
  );
  if (node.tokens === 1) {
    group.appendChild(
      svgEl("circle", {
        class: "token",
        cx: String(node.x),
        cy: String(node.y),
        r: "6",
      }),
    );
  } else if (node.tokens > 1) {
    const count = svgEl("text", {
      class: "token-count",
      x: String(node.x),
      y: String(node.y + 5),
      "text-anchor": "middle",
    });
    count.textContent = String(node.tokens);
    group.appendChild(count);
  }
  const label = svgEl("text", {
    class: "node-label",
    x: String(node.x),
    y: String(node.y + PLACE_RADIUS + 16),
    "text-anchor": "middle",
  });
  label.textContent = shorten(node.label);
  const title = document.createElementNS(SVG_NS, "title");
  title.textContent = node.label;
  group.appendChild(title);
  group.appendChild(label);
  return group;
}

function renderTransition(
  node: ViewNode,
  onClick: (id: string) => void,
): SVGGElement {
  const classes = ["transition"];
  if (node.enabled) classes.push("enabled");
  if (node.orAlternative) classes.push("or-choice");
  const group = svgEl("g", {
    class: classes.join(" "),
    "data-id": node.id,
    "data-enabled": String(node.enabled),
  });
  group.appendChild(
    svgEl("rect", {
      x: String(node.x - TRANSITION_W / 2),
      y: String(node.y - TRANSITION_H / 2),
      width: String(TRANSITION_W),
      height: String(TRANSITION_H),
      rx: "6",
    }),
  );
  const label = svgEl("text", {
    class: "node-label",
    x: String(node.x),
    y: String(node.y + 4),
    "text-anchor": "middle",
  });
  label.textContent = shorten(node.label, 14);
  const title = document.createElementNS(SVG_NS, "title");
  title.textContent = node.orAlternative
    ? `${node.label} (choice of path)`
    : node.label;
  group.appendChild(title);
  group.appendChild(label);
  if (node.enabled) {
    group.addEventListener("click", () => onClick(node.id));
  }
  return group;
}

/** Trim an arc endpoint back to the node boundary so arrowheads stay visible. */
function trimmed(
  from: { x: number; y: number },
  to: { x: number; y: number },
  fromKind: "place" | "transition",
): { x1: number; y1: number; x2: number; y2: number } {
  const dx = to.x - from.x;
  const dy = to.y - from.y;
  const length = Math.hypot(dx, dy) || 1;
  const ux = dx / length;
  const uy = dy / length;
  const startGap = fromKind === "place" ? PLACE_RADIUS : TRANSITION_W / 2 - 14;
  const endGap = fromKind === "place" ? TRANSITION_W / 2 - 14 : PLACE_RADIUS;
  return {
    x1: from.x + ux * startGap,
    y1: from.y + uy * startGap,
    x2: to.x - ux * (endGap + 6),
    y2: to.y - uy * (endGap + 6),
  };
}

/** Rebuild the net drawing from scratch; same model in, same DOM out. */
export function renderNet(
  container: HTMLElement,
  vm: NetViewModel,
  onTransitionClick: (id: string) => void,
): void {
  const maxX = Math.max(...vm.nodes.map((n) => n.x), 200);
  const maxY = Math.max(...vm.nodes.map((n) => n.y), 160);
  const svg = svgEl("svg", {
    viewBox: `0 0 ${maxX + 100} ${maxY + 90}`,
    class: "net",
    role: "img",
  });
  const defs = svgEl("defs", {});
  const marker = svgEl("marker", {
    id: "arrowhead",
    viewBox: "0 0 10 10",
    refX: "9",
    refY: "5",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z" }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const arc of vm.arcs) {
    const { x1, y1, x2, y2 } = trimmed(arc.from, arc.to, arc.fromKind);
    svg.appendChild(
      svgEl("line", {
        class: "arc",
        x1: String(x1),
        y1: String(y1),
        x2: String(x2),
        y2: String(y2),
        "marker-end": "url(#arrowhead)",
      }),
    );
  }
  for (const node of vm.nodes) {
    svg.appendChild(
      node.kind === "place"
        ? renderPlace(node)
        : renderTransition(node, onTransitionClick),
    );
  }
  container.replaceChildren(svg);
}

export function renderBanner(container: HTMLElement, completed: boolean): void {
  container.replaceChildren();
  if (!completed) return;
  const banner = document.createElement("div");
  banner.className = "banner";
  banner.dataset.testid = "completion-banner";
  banner.textContent = "Process complete: every step along this path passed.";
  container.appendChild(banner);
}

function badgeClass(status: string): string {
  return `badge badge-${status.toLowerCase()}`;
}

/** Firing entries in event order; failed entries carry the message verbatim. */
export function renderPanel(container: HTMLElement, entries: PanelEntry[]): void {
  container.replaceChildren();
  for (const entry of entries) {
    const item = document.createElement("article");
    item.className = "firing" + (entry.advanced ? "" : " blocked");
    item.dataset.transition = entry.transition;
    item.dataset.status = entry.status;

    const gwt = document.createElement("pre");
    gwt.className = "gwt";
    gwt.textContent = entry.gwtLines.join("\n");
    item.appendChild(gwt);

    const list = document.createElement("ul");
    list.className = "steps";
    for (const step of entry.steps) {
      const line = document.createElement("li");
      const badge = document.createElement("span");
      badge.className = badgeClass(step.status);
      badge.textContent = step.status;
      line.appendChild(badge);
      line.appendChild(document.createTextNode(" " + step.step_text));
      if (step.status === "Failed" || step.message) {
        const message = document.createElement("div");
        message.className = "step-message";
        message.textContent = step.message;
        line.appendChild(message);
      }
      list.appendChild(line);
    }
    item.appendChild(list);
    container.appendChild(item);
  }
}

/** Extension, not part of the core flow: detail of the latest firing. */
export function renderDebugPanel(
  container: HTMLElement,
  entry: PanelEntry | undefined,
): void {
  container.replaceChildren();
  const heading = document.createElement("h3");
  heading.textContent = "Last firing (debug extension)";
  container.appendChild(heading);
  if (!entry) {
    const empty = document.createElement("p");
    empty.textContent = "Nothing fired yet.";
    container.appendChild(empty);
    return;
  }
  const summary = document.createElement("p");
  summary.textContent = `${entry.transition}: ${entry.status}`;
  container.appendChild(summary);
}
