import type { NetInfo } from "./types.js";

export interface NodePosition {
  id: string;
  kind: "place" | "transition";
  layer: number;
  x: number;
  y: number;
}

export interface NetLayout {
  nodes: Map<string, NodePosition>;
  width: number;
  height: number;
}

export interface LayoutOptions {
  columnGap?: number;
  rowGap?: number;
  margin?: number;
  /** Explicit coordinates (e.g. from a model file) win over the computed ones. */
  overrides?: Record<string, { x: number; y: number }>;
}

interface Topology {
  ids: string[];
  kinds: Map<string, "place" | "transition">;
  outgoing: Map<string, string[]>;
  incoming: Map<string, string[]>;
}

function topology(net: NetInfo): Topology {
  const ids = [
    ...net.places.map((p) => p.id),
    ...net.transitions.map((t) => t.id),
  ];
  const kinds = new Map<string, "place" | "transition">();
  net.places.forEach((p) => kinds.set(p.id, "place"));
  net.transitions.forEach((t) => kinds.set(t.id, "transition"));
  const outgoing = new Map<string, string[]>(ids.map((id) => [id, []]));
  const incoming = new Map<string, string[]>(ids.map((id) => [id, []]));
  for (const arc of net.arcs) {
    outgoing.get(arc.source)?.push(arc.target);
    incoming.get(arc.target)?.push(arc.source);
  }
  return { ids, kinds, outgoing, incoming };
}

/** Arcs that close a cycle (found by DFS); ignored while layering. */
function backArcs(topo: Topology): Set<string> {
  const back = new Set<string>();
  const state = new Map<string, "active" | "done">();

  function visit(id: string): void {
    state.set(id, "active");
    for (const next of topo.outgoing.get(id) ?? []) {
      const s = state.get(next);
      if (s === "active") {
        back.add(`${id}->${next}`);
      } else if (s === undefined) {
        visit(next);
      }
    }
    state.set(id, "done");
  }

  for (const id of topo.ids) {
    if (!state.has(id)) visit(id);
  }
  return back;
}

/** Longest-path layering, left to right; cycle-closing arcs are skipped. */
function assignLayers(topo: Topology): Map<string, number> {
  const back = backArcs(topo);
  const layers = new Map<string, number>();
  const pending = new Map<string, number>();
  const queue: string[] = [];
  for (const id of topo.ids) {
    const preds = (topo.incoming.get(id) ?? []).filter(
      (p) => !back.has(`${p}->${id}`),
    );
    pending.set(id, preds.length);
    if (preds.length === 0) {
      layers.set(id, 0);
      queue.push(id);
    }
  }
  while (queue.length > 0) {
    const id = queue.shift()!;
    for (const next of topo.outgoing.get(id) ?? []) {
      if (back.has(`${id}->${next}`)) continue;
      const candidate = (layers.get(id) ?? 0) + 1;
      layers.set(next, Math.max(layers.get(next) ?? 0, candidate));
      const left = (pending.get(next) ?? 0) - 1;
      pending.set(next, left);
      if (left === 0) queue.push(next);
    }
  }
  // nodes trapped in pure cycles never drained; drop them at layer 0 rather
  // than lose them from the drawing
  for (const id of topo.ids) {
    if (!layers.has(id)) layers.set(id, 0);
  }
  return layers;
}

/** A few barycenter sweeps to reduce crossings; deterministic tiebreaks. */
function orderWithinLayers(
  topo: Topology,
  layers: Map<string, number>,
): Map<string, number> {
  const maxLayer = Math.max(0, ...layers.values());
  const byLayer: string[][] = Array.from({ length: maxLayer + 1 }, () => []);
  for (const id of topo.ids) byLayer[layers.get(id)!].push(id);

  const order = new Map<string, number>();
  const refresh = () =>
    byLayer.forEach((column) => column.forEach((id, i) => order.set(id, i)));
  refresh();

  const barycenter = (id: string, neighbours: string[]): number => {
    const relevant = neighbours.filter((n) => order.has(n));
    if (relevant.length === 0) return order.get(id)!;
    return relevant.reduce((sum, n) => sum + order.get(n)!, 0) / relevant.length;
  };

  for (let sweep = 0; sweep < 4; sweep++) {
    const columns = sweep % 2 === 0 ? byLayer : [...byLayer].reverse();
    for (const column of columns) {
      const reference = sweep % 2 === 0 ? topo.incoming : topo.outgoing;
      column.sort((a, b) => {
        const diff =
          barycenter(a, reference.get(a) ?? []) -
          barycenter(b, reference.get(b) ?? []);
        return diff !== 0 ? diff : a.localeCompare(b);
      });
      refresh();
    }
  }
  return order;
}

export function layoutNet(net: NetInfo, options: LayoutOptions = {}): NetLayout {
  const { columnGap = 150, rowGap = 95, margin = 60 } = options;
  const topo = topology(net);
  const layers = assignLayers(topo);
  const order = orderWithinLayers(topo, layers);

  const maxLayer = Math.max(0, ...layers.values());
  const counts: number[] = Array.from({ length: maxLayer + 1 }, () => 0);
  for (const id of topo.ids) counts[layers.get(id)!]++;
  const tallest = Math.max(1, ...counts);

  const nodes = new Map<string, NodePosition>();
  for (const id of topo.ids) {
    const layer = layers.get(id)!;
    const centered = order.get(id)! + (tallest - counts[layer]) / 2;
    const override = options.overrides?.[id];
    nodes.set(id, {
      id,
      kind: topo.kinds.get(id)!,
      layer,
      x: override?.x ?? margin + layer * columnGap,
      y: override?.y ?? margin + centered * rowGap,
    });
  }
  return {
    nodes,
    width: margin * 2 + maxLayer * columnGap,
    height: margin * 2 + (tallest - 1) * rowGap,
  };
}
