// Pure HTML/SVG string builders. Rendering reads the state and never
// writes it; displayed numbers come straight from the payloads at one
// decimal place.

import { describeAlert } from "./alerts.js";
import {
  ACTIVITY_LABELS,
  ActivityDecision,
  ForecastSeries,
  SafeBandConfig,
  ViewState,
  VitalsSample,
} from "./types.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderConnectionBadge(state: ViewState): string {
  const classes: string[] = [`badge-${state.connection}`];
  const words: string[] = [];
  switch (state.connection) {
    case "live":
      words.push("live");
      break;
    case "warming":
      words.push("warming up");
      break;
    case "disconnected":
      words.push("disconnected");
      break;
    case "offline":
      words.push("offline replay");
      break;
  }
  if (state.stale) {
    classes.push("badge-stale");
    words.push("stale data");
  }
  return `<span class="badge ${classes.join(" ")}">${esc(words.join(", "))}</span>`;
}

export function renderVitalsPanel(sample: VitalsSample | null): string {
  if (sample === null) {
    return `<div class="panel vitals warming">warming up, no extracted minutes yet</div>`;
  }
  const hr = Number.isNaN(sample.heartRateBpm) ? "--" : sample.heartRateBpm.toFixed(1);
  const rr = Number.isNaN(sample.respirationBpm) ? "--" : sample.respirationBpm.toFixed(1);
  return (
    `<div class="panel vitals quality-${sample.quality.toLowerCase()}">` +
    `<div class="metric"><span class="value">${hr}</span> bpm heart rate</div>` +
    `<div class="metric"><span class="value">${rr}</span> bpm respiration</div>` +
    `<div class="meta">minute ${sample.minuteIndex}, quality ${sample.quality}</div>` +
    `</div>`
  );
}

export function renderAlertBanner(state: ViewState): string {
  if (state.alerts.length === 0) {
    return `<div class="banner ok">forecast inside safe bands</div>`;
  }
  const items = state.alerts.map((a) => `<li>${esc(describeAlert(a))}</li>`).join("");
  return `<div class="banner alert">forecast leaves safe bands<ul>${items}</ul></div>`;
}

interface ChartPoint {
  minute: number;
  value: number;
}

function polyline(
  points: ChartPoint[],
  minuteSpan: [number, number],
  valueSpan: [number, number],
  width: number,
  height: number,
  cssClass: string,
): string {
  if (points.length === 0) return "";
  const [m0, m1] = minuteSpan;
  const [v0, v1] = valueSpan;
  const coords = points
    .filter((p) => !Number.isNaN(p.value))
    .map((p) => {
      const x = ((p.minute - m0) / Math.max(1, m1 - m0)) * width;
      const y = height - ((p.value - v0) / Math.max(1e-9, v1 - v0)) * height;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    });
  return `<polyline class="${cssClass}" fill="none" points="${coords.join(" ")}" />`;
}

/**
 * History line plus the forecast line extending three hours past the
 * latest minute, with the safe band drawn behind both.
 */
export function renderForecastChart(
  history: VitalsSample[],
  forecast: ForecastSeries | null,
  bands: SafeBandConfig,
  vital: "heart_rate" | "respiration" = "heart_rate",
  width = 640,
  height = 160,
): string {
  const past: ChartPoint[] = history.map((s) => ({
    minute: s.minuteIndex,
    value: vital === "heart_rate" ? s.heartRateBpm : s.respirationBpm,
  }));
  const future: ChartPoint[] = [];
  if (forecast !== null) {
    const values = vital === "heart_rate" ? forecast.heartRate : forecast.respiration;
    values.forEach((v, i) => {
      future.push({
        minute: forecast.issuedAtMinute + forecast.stepMinutes * (i + 1) - 1,
        value: v,
      });
    });
  }
  const all = [...past, ...future];
  if (all.length === 0) {
    return `<svg class="chart empty" viewBox="0 0 ${width} ${height}"></svg>`;
  }
  const minutes = all.map((p) => p.minute);
  const [low, high] =
    vital === "heart_rate"
      ? [bands.hrLowBpm, bands.hrHighBpm]
      : [bands.rrLowBpm, bands.rrHighBpm];
  const values = all.map((p) => p.value).filter((v) => !Number.isNaN(v));
  const minuteSpan: [number, number] = [Math.min(...minutes), Math.max(...minutes)];
  const valueSpan: [number, number] = [
    Math.min(low, ...values) - 2,
    Math.max(high, ...values) + 2,
  ];
  const yOf = (v: number) =>
    height - ((v - valueSpan[0]) / (valueSpan[1] - valueSpan[0])) * height;
  const bandTop = yOf(high);
  const bandRect =
    `<rect class="safe-band" x="0" y="${bandTop.toFixed(1)}" width="${width}"` +
    ` height="${(yOf(low) - bandTop).toFixed(1)}" />`;
  return (
    `<svg class="chart" viewBox="0 0 ${width} ${height}" role="img">` +
    bandRect +
    polyline(past, minuteSpan, valueSpan, width, height, "history-line") +
    polyline(future, minuteSpan, valueSpan, width, height, "forecast-line") +
    `</svg>`
  );
}

export function renderActivityPanel(decision: ActivityDecision | null): string {
  if (decision === null) {
    return `<div class="panel activity warming">warming up, no motion windows yet</div>`;
  }
  const bars = ACTIVITY_LABELS.map((label, i) => {
    const p = decision.probabilities[i];
    const active = decision.activeLabels.includes(label) ? " active" : "";
    return (
      `<div class="prob-row${active}"><span class="label">${label}</span>` +
      `<span class="bar" style="width:${(p * 100).toFixed(1)}%"></span>` +
      `<span class="prob">${p.toFixed(2)}</span></div>`
    );
  }).join("");
  return (
    `<div class="panel activity">` +
    `<div class="status">current status: <strong>${decision.currentStatus}</strong></div>` +
    bars +
    `</div>`
  );
}

export function renderView(state: ViewState, bands: SafeBandConfig): string {
  return (
    `<header><h1>patient ${esc(state.patientId)}</h1>${renderConnectionBadge(state)}</header>` +
    renderAlertBanner(state) +
    renderVitalsPanel(state.vitals) +
    `<h2>heart rate, next 3 hours</h2>` +
    renderForecastChart(state.history, state.forecast, bands, "heart_rate") +
    `<h2>respiration, next 3 hours</h2>` +
    renderForecastChart(state.history, state.forecast, bands, "respiration") +
    renderActivityPanel(state.activity)
  );
}
