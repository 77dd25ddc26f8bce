/** SVG renderers: seasonal cluster panels, sweep chart, manifest funnel.
 *
 * Plain DOM only so the same code runs in the browser and under jsdom.
 * Patterns draw opaque on top; member overlays draw translucent below.
 */

import type { SweepJson } from "./types.js";
import type { AnomalyCard, ClusterView, FunnelStep } from "./views.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PANEL_W = 220;
const PANEL_H = 110;
const PAD = 6;

function svgEl<K extends keyof SVGElementTagNameMap>(
  doc: Document,
  name: K,
  attrs: Record<string, string> = {}
): SVGElementTagNameMap[K] {
  const el = doc.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

export function polylinePoints(
  values: number[],
  width: number,
  height: number,
  yMin: number,
  yMax: number
): string {
  const span = yMax - yMin || 1;
  const step = (width - 2 * PAD) / (values.length - 1);
  return values
    .map((v, i) => {
      const x = PAD + i * step;
      const y = height - PAD - ((v - yMin) / span) * (height - 2 * PAD);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

function valueRange(view: ClusterView): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const block of view.pattern) {
    for (const v of block) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  for (const member of view.members) {
    for (const block of member.seasons) {
      for (const v of block) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
  }
  return [lo, hi];
}

/** One card per cluster: four season panels, pattern over members. */
export function renderClusterCard(doc: Document, view: ClusterView): HTMLElement {
  const card = doc.createElement("article");
  card.className = "cluster-card";
  card.dataset.cluster = String(view.cluster);
  card.dataset.patternValues = JSON.stringify(view.pattern);

  const heading = doc.createElement("h3");
  heading.textContent =
    `cluster ${view.cluster} — ${view.memberCount} buildings`;
  card.appendChild(heading);

  const meta = doc.createElement("p");
  meta.className = "card-meta";
  const shown =
    view.sampledCount < view.memberCount
      ? `showing ${view.sampledCount} sampled members (seed ${view.sampleSeed})`
      : `showing all ${view.memberCount} members`;
  meta.textContent =
    `${shown} · suggestion: ${view.suggestion.strategy} ` +
    `(${Math.round(view.suggestion.confidence * 100)}%)`;
  card.appendChild(meta);

  const panels = doc.createElement("div");
  panels.className = "season-panels";
  const [yMin, yMax] = valueRange(view);
  view.seasonNames.forEach((name, s) => {
    const figure = doc.createElement("figure");
    figure.className = "season-panel";
    figure.dataset.season = name;
    const svg = svgEl(doc, "svg", {
      viewBox: `0 0 ${PANEL_W} ${PANEL_H}`,
      width: String(PANEL_W),
      height: String(PANEL_H),
    });
    for (const member of view.members) {
      svg.appendChild(
        svgEl(doc, "polyline", {
          class: "member",
          points: polylinePoints(member.seasons[s], PANEL_W, PANEL_H, yMin, yMax),
          fill: "none",
          stroke: "#1f77b4",
          "stroke-opacity": "0.08",
          "stroke-width": "1",
        })
      );
    }
    svg.appendChild(
      svgEl(doc, "polyline", {
        class: "pattern",
        points: polylinePoints(view.pattern[s], PANEL_W, PANEL_H, yMin, yMax),
        fill: "none",
        stroke: "#d62728",
        "stroke-opacity": "1",
        "stroke-width": "1.8",
      })
    );
    const caption = doc.createElement("figcaption");
    caption.textContent = name;
    figure.appendChild(svg);
    figure.appendChild(caption);
    panels.appendChild(figure);
  });
  card.appendChild(panels);
  return card;
}

export function renderSweepChart(doc: Document, sweep: SweepJson): HTMLElement {
  const wrap = doc.createElement("div");
  wrap.className = "sweep-chart";
  const width = 420;
  const height = 160;
  const svg = svgEl(doc, "svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
  });
  const ks = sweep.rows.map((r) => r.k);
  const scores = sweep.rows.map((r) => r.mean_silhouette);
  const kMin = Math.min(...ks);
  const kMax = Math.max(...ks);
  const x = (k: number) =>
    PAD + ((k - kMin) / Math.max(kMax - kMin, 1)) * (width - 2 * PAD);
  const y = (s: number) => height - PAD - s * (height - 2 * PAD);
  svg.appendChild(
    svgEl(doc, "polyline", {
      class: "sweep-line",
      points: sweep.rows.map((r) => `${x(r.k)},${y(r.mean_silhouette)}`).join(" "),
      fill: "none",
      stroke: "#246",
      "stroke-width": "1.5",
    })
  );
  for (const row of sweep.rows) {
    const dot = svgEl(doc, "circle", {
      cx: String(x(row.k)),
      cy: String(y(row.mean_silhouette)),
      r: row.k === sweep.recommended_k ? "5" : "3",
      fill: row.k === sweep.recommended_k ? "#d62728" : "#246",
    });
    dot.appendChild(svgEl(doc, "title")).textContent =
      `k=${row.k}: ${row.mean_silhouette.toFixed(3)} (${row.quality})`;
    svg.appendChild(dot);
  }
  const label = doc.createElement("p");
  label.textContent =
    `recommended k = ${sweep.recommended_k} ` +
    `(silhouette ${Math.max(...scores).toFixed(3)})`;
  wrap.appendChild(svg);
  wrap.appendChild(label);
  return wrap;
}

export function renderFunnel(doc: Document, steps: FunnelStep[]): HTMLElement {
  const wrap = doc.createElement("div");
  wrap.className = "funnel";
  const widest = Math.max(...steps.map((s) => s.count), 1);
  for (const step of steps) {
    const row = doc.createElement("div");
    row.className = "funnel-row";
    const bar = doc.createElement("div");
    bar.className = "funnel-bar";
    bar.style.width = `${Math.max((step.count / widest) * 100, 2)}%`;
    const text = doc.createElement("span");
    text.textContent = step.detail
      ? `${step.label}: ${step.count} (${step.detail})`
      : `${step.label}: ${step.count}`;
    row.appendChild(bar);
    row.appendChild(text);
    wrap.appendChild(row);
  }
  return wrap;
}

export function renderAnomalyCard(doc: Document, card: AnomalyCard): HTMLElement {
  const article = doc.createElement("article");
  article.className = "anomaly-card";
  article.dataset.buildingId = card.buildingId;
  const heading = doc.createElement("h4");
  heading.textContent = card.buildingId;
  article.appendChild(heading);
  const meta = doc.createElement("p");
  meta.textContent =
    `cluster ${card.cluster} · distance ${card.distance.toFixed(3)} · ` +
    `margin ${card.eta.toFixed(3)}`;
  article.appendChild(meta);
  if (card.profile) {
    const svg = svgEl(doc, "svg", {
      viewBox: `0 0 ${PANEL_W} ${PANEL_H / 2}`,
      width: String(PANEL_W),
      height: String(PANEL_H / 2),
    });
    const lo = Math.min(...card.profile);
    const hi = Math.max(...card.profile);
    svg.appendChild(
      svgEl(doc, "polyline", {
        class: "anomaly-profile",
        points: polylinePoints(card.profile, PANEL_W, PANEL_H / 2, lo, hi),
        fill: "none",
        stroke: "#555",
        "stroke-width": "0.8",
      })
    );
    article.appendChild(svg);
  }
  return article;
}
