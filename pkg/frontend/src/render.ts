/**
 * Markup rendering.  Every function takes a ViewState and returns a string;
 * the app assigns the result to innerHTML, and the tests compare strings
 * directly.  Nothing here touches the DOM.
 */

import type { ViewState, ViewTeamEnRoute } from "./viewmodel.js";
import { VIEW_HEIGHT, VIEW_WIDTH } from "./layout.js";

const BUS_RADIUS = 16;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number): string {
  return String(Math.round(value * 100) / 100);
}

function cost(value: number): string {
  return value.toFixed(4);
}

function renderRoute(team: ViewTeamEnRoute): string {
  const parts: string[] = [];
  if (team.arrow) {
    parts.push(
      `<line class="route" x1="${fmt(team.arrow.x1)}" y1="${fmt(team.arrow.y1)}"`
      + ` x2="${fmt(team.arrow.x2)}" y2="${fmt(team.arrow.y2)}" marker-end="url(#arrow)"/>`,
    );
  }
  parts.push(
    `<g class="team enroute" data-team="${team.team}">`
    + `<circle cx="${fmt(team.x)}" cy="${fmt(team.y)}" r="10"/>`
    + `<text x="${fmt(team.x)}" y="${fmt(team.y)}" dy="0.35em">T${team.team}</text>`
    + `</g>`,
  );
  parts.push(
    `<text class="route-label" x="${fmt(team.x)}" y="${fmt(team.y - 16)}">${team.label}</text>`,
  );
  return parts.join("");
}

export function renderScene(view: ViewState): string {
  if (view.error) {
    return `<svg class="scene" viewBox="0 0 ${VIEW_WIDTH} ${VIEW_HEIGHT}"></svg>`;
  }
  const parts: string[] = [];
  parts.push(
    `<svg class="scene" viewBox="0 0 ${VIEW_WIDTH} ${VIEW_HEIGHT}" role="img">`,
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7"`
    + ` markerHeight="7" orient="auto-start-reverse">`
    + `<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>`,
  );
  for (const branch of view.branches) {
    parts.push(
      `<line class="branch" x1="${fmt(branch.x1)}" y1="${fmt(branch.y1)}"`
      + ` x2="${fmt(branch.x2)}" y2="${fmt(branch.y2)}"/>`,
    );
  }
  for (const team of view.teams) {
    if (team.kind === "enroute") {
      parts.push(renderRoute(team));
    }
  }
  for (const bus of view.buses) {
    const classes = ["bus", bus.status];
    if (bus.selectable) classes.push("selectable");
    parts.push(`<g class="${classes.join(" ")}" data-bus="${bus.id}">`);
    if (bus.isSource) {
      const d = BUS_RADIUS + 6;
      parts.push(
        `<rect class="source" x="${fmt(bus.x - d)}" y="${fmt(bus.y - d)}"`
        + ` width="${2 * d}" height="${2 * d}"/>`,
      );
    }
    parts.push(
      `<circle cx="${fmt(bus.x)}" cy="${fmt(bus.y)}" r="${BUS_RADIUS}" fill="${bus.fill}"/>`,
      `<text x="${fmt(bus.x)}" y="${fmt(bus.y)}" dy="0.35em">${bus.id}</text>`,
      `</g>`,
    );
  }
  for (const team of view.teams) {
    if (team.kind === "at") {
      parts.push(
        `<g class="team" data-team="${team.team}">`
        + `<circle cx="${fmt(team.x)}" cy="${fmt(team.y)}" r="10"/>`
        + `<text x="${fmt(team.x)}" y="${fmt(team.y)}" dy="0.35em">T${team.team}</text>`
        + `</g>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}

function renderHeader(view: ViewState): string {
  const cells = [
    `<div class="stat"><dt>period</dt><dd>${view.elapsed}</dd></div>`,
    `<div class="stat"><dt>remaining</dt><dd>${view.remainingHorizon}</dd></div>`,
  ];
  if (view.expectedCost !== null) {
    cells.push(`<div class="stat"><dt>expected cost</dt><dd>${cost(view.expectedCost)}</dd></div>`);
  }
  return `<section class="status"><h1>${esc(view.name)}</h1><dl>${cells.join("")}</dl></section>`;
}

function renderCommands(view: ViewState): string {
  if (view.terminal || view.horizonExhausted) return "";
  const body = view.cascade
    ? `<p class="cascade">initial attempts are in progress; report how they end</p>`
    : `<ul>${view.commandLines.map((line) => `<li>${esc(line)}</li>`).join("")}</ul>`;
  return `<section class="commands"><h2>commands</h2>${body}</section>`;
}

function renderReport(view: ViewState): string {
  if (view.options.length === 0) return "";
  const rows = view.buses
    .filter((bus) => bus.selectable)
    .map((bus) => {
      const button = (outcome: "energized" | "damaged") =>
        `<button data-bus="${bus.id}" data-outcome="${outcome}"`
        + ` aria-pressed="${bus.selected === outcome}">${outcome}</button>`;
      return `<div class="outcome-row"><span>bus ${bus.id}</span>`
        + `${button("energized")}${button("damaged")}</div>`;
    });
  const hints = view.options
    .map((option) => {
      const combo = Object.entries(option.outcomes)
        .sort((a, b) => Number(a[0]) - Number(b[0]))
        .map(([bus, result]) => `${bus} ${result}`)
        .join(", ");
      return `<li>${esc(combo)} <em>p ${option.p}</em></li>`;
    })
    .join("");
  return `<section class="report"><h2>report outcomes</h2>${rows.join("")}`
    + `<button id="submit"${view.canSubmit ? "" : " disabled"}>submit report</button>`
    + `<ul class="options">${hints}</ul></section>`;
}

function renderAlternatives(view: ViewState): string {
  if (view.alternatives.length === 0) return "";
  const rows = view.alternatives.map((alt) => {
    const label = alt.commands ? alt.commands.join("; ") : "initial cascade";
    const badge = alt.badge !== null
      ? `<span class="badge">what-if ${cost(alt.badge)}</span>`
      : "";
    const chosen = alt.chosen ? `<span class="chosen">chosen</span>` : "";
    return `<li data-action="${alt.action}">${cost(alt.value)} · ${esc(label)} `
      + `<button class="whatif" data-action="${alt.action}">what if</button>${badge}${chosen}</li>`;
  });
  return `<section class="alternatives"><h2>alternatives</h2><ol>${rows.join("")}</ol></section>`;
}

function renderHistory(view: ViewState): string {
  if (view.historyLines.length === 0) return "";
  const rows = view.historyLines.map((line) => `<li>${esc(line)}</li>`).join("");
  return `<section class="history"><h2>history</h2><ol>${rows}</ol></section>`;
}

export function renderPanel(view: ViewState): string {
  if (view.error) {
    return `<div class="panel"><div class="banner error">${esc(view.error)}</div></div>`;
  }
  const banner = view.banner ? `<div class="banner">${esc(view.banner)}</div>` : "";
  return `<div class="panel">${renderHeader(view)}${banner}${renderCommands(view)}`
    + `${renderReport(view)}${renderAlternatives(view)}${renderHistory(view)}</div>`;
}

export function renderScreen(view: ViewState): string {
  return `<div class="screen">${renderScene(view)}${renderPanel(view)}</div>`;
}
