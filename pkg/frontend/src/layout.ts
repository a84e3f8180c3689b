// Deterministic force layout for the relation network. Small enough to
// stay dependency-free: spring forces along edges, pairwise repulsion,
// and a centering pull on the focal node. Nodes start on a circle in id
// order, so the same graph always lays out the same way.

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  fixed: boolean;
}

export interface LayoutEdge {
  source: string;
  target: string;
}

export interface LayoutOptions {
  width: number;
  height: number;
  springLength: number;
  springStrength: number;
  repulsion: number;
  damping: number;
}

export const DEFAULT_OPTIONS: LayoutOptions = {
  width: 800,
  height: 520,
  springLength: 140,
  springStrength: 0.02,
  repulsion: 12000,
  damping: 0.82,
};

export function initialNodes(ids: string[], center: string, options = DEFAULT_OPTIONS): LayoutNode[] {
  const cx = options.width / 2;
  const cy = options.height / 2;
  const others = ids.filter((id) => id !== center).sort();
  const radius = Math.min(options.width, options.height) / 3;
  const nodes: LayoutNode[] = [
    { id: center, x: cx, y: cy, vx: 0, vy: 0, fixed: true },
  ];
  others.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(others.length, 1);
    nodes.push({
      id,
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
      vx: 0,
      vy: 0,
      fixed: false,
    });
  });
  return nodes;
}

export function layoutStep(
  nodes: LayoutNode[],
  edges: LayoutEdge[],
  options = DEFAULT_OPTIONS,
): void {
  const byId = new Map(nodes.map((n) => [n.id, n]));

  for (let i = 0; i < nodes.length; i++) {
    for (let j = i + 1; j < nodes.length; j++) {
      const a = nodes[i];
      const b = nodes[j];
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const distSq = Math.max(dx * dx + dy * dy, 64);
      const force = options.repulsion / distSq;
      const dist = Math.sqrt(distSq);
      const fx = (dx / dist) * force;
      const fy = (dy / dist) * force;
      a.vx -= fx;
      a.vy -= fy;
      b.vx += fx;
      b.vy += fy;
    }
  }

  for (const edge of edges) {
    const a = byId.get(edge.source);
    const b = byId.get(edge.target);
    if (!a || !b) continue;
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
    const stretch = dist - options.springLength;
    const force = options.springStrength * stretch;
    const fx = (dx / dist) * force;
    const fy = (dy / dist) * force;
    a.vx += fx;
    a.vy += fy;
    b.vx -= fx;
    b.vy -= fy;
  }

  for (const node of nodes) {
    if (node.fixed) {
      node.vx = 0;
      node.vy = 0;
      continue;
    }
    node.vx *= options.damping;
    node.vy *= options.damping;
    node.x += node.vx;
    node.y += node.vy;
    node.x = Math.min(Math.max(node.x, 20), options.width - 20);
    node.y = Math.min(Math.max(node.y, 20), options.height - 20);
  }
}

export function runLayout(
  ids: string[],
  center: string,
  edges: LayoutEdge[],
  iterations = 120,
  options = DEFAULT_OPTIONS,
): LayoutNode[] {
  const nodes = initialNodes(ids, center, options);
  for (let i = 0; i < iterations; i++) {
    layoutStep(nodes, edges, options);
  }
  return nodes;
}
