import type { NetLayout } from "./layout.js";
import type {
  EnabledEntry,
  FiringReport,
  NetInfo,
  SessionState,
  StepResult,
} from "./types.js";

export interface ViewNode {
  id: string;
  label: string;
  kind: "place" | "transition";
  x: number;
  y: number;
  tokens: number;
  enabled: boolean;
  orAlternative: boolean;
  constructs: string[];
}

export interface ViewArc {
  from: { x: number; y: number };
  to: { x: number; y: number };
  fromKind: "place" | "transition";
}

export interface NetViewModel {
  nodes: ViewNode[];
  arcs: ViewArc[];
  completed: boolean;
}

/**
 * Merge static structure, layout and the server-reported state.
 * Exactly the transitions the server lists as enabled become clickable.
 */
export function buildViewModel(
  net: NetInfo,
  layout: NetLayout,
  state: SessionState,
): NetViewModel {
  const enabled = new Map<string, EnabledEntry>(
    state.enabled.map((e) => [e.id, e]),
  );
  const constructs = new Map<string, string[]>();
  for (const entry of net.constructs) {
    const list = constructs.get(entry.node) ?? [];
    list.push(entry.kind);
    constructs.set(entry.node, list);
  }
  const labels = new Map<string, string>();
  net.places.forEach((p) => labels.set(p.id, p.label));
  net.transitions.forEach((t) => labels.set(t.id, t.label));

  const nodes: ViewNode[] = [];
  for (const position of layout.nodes.values()) {
    nodes.push({
      id: position.id,
      label: labels.get(position.id) ?? position.id,
      kind: position.kind,
      x: position.x,
      y: position.y,
      tokens: state.marking[position.id] ?? 0,
      enabled: enabled.has(position.id),
      orAlternative: enabled.get(position.id)?.or_alternative ?? false,
      constructs: constructs.get(position.id) ?? [],
    });
  }
  nodes.sort((a, b) => a.id.localeCompare(b.id));

  const arcs: ViewArc[] = net.arcs.map((arc) => {
    const from = layout.nodes.get(arc.source)!;
    const to = layout.nodes.get(arc.target)!;
    return {
      from: { x: from.x, y: from.y },
      to: { x: to.x, y: to.y },
      fromKind: from.kind,
    };
  });

  return { nodes, arcs, completed: state.enabled.length === 0 };
}

export interface PanelEntry {
  transition: string;
  gwtLines: string[];
  steps: StepResult[];
  advanced: boolean;
  status: string;
}

/** The GWT message block shown for one firing, parallel branches marked. */
export function gwtLines(report: FiringReport): string[] {
  const lines = [`Given ${report.gwt.given[0] ?? ""}`];
  for (const label of report.gwt.given.slice(1)) {
    lines.push(`And in parallel: ${label}`);
  }
  lines.push(`When ${report.gwt.when}`);
  lines.push(`Then ${report.gwt.then[0] ?? ""}`);
  for (const label of report.gwt.then.slice(1)) {
    lines.push(`And in parallel: ${label}`);
  }
  return lines;
}

export function panelEntry(report: FiringReport): PanelEntry {
  return {
    transition: report.transition,
    gwtLines: gwtLines(report),
    steps: [...report.step_results],
    advanced: report.advanced,
    status: report.status,
  };
}
