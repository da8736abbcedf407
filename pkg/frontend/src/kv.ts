// Parsers for the service's key=value response bodies.

import {
  ACTIVITY_LABELS,
  ActivityDecision,
  ActivityLabel,
  ForecastSeries,
  Quality,
  VitalsSample,
} from "./types.js";

export function decodeKv(text: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (line === "") continue;
    const eq = line.indexOf("=");
    if (eq < 1) throw new Error(`not a key=value line: ${JSON.stringify(line)}`);
    out[line.slice(0, eq)] = line.slice(eq + 1);
  }
  return out;
}

function need(kv: Record<string, string>, key: string): string {
  const v = kv[key];
  if (v === undefined) throw new Error(`missing key ${key}`);
  return v;
}

function num(kv: Record<string, string>, key: string): number {
  const v = Number(need(kv, key));
  if (Number.isNaN(v) && need(kv, key) !== "nan") {
    throw new Error(`${key} is not a number: ${kv[key]}`);
  }
  return v;
}

function numberList(text: string): number[] {
  if (text === "") return [];
  return text.split(",").map((s) => {
    const v = Number(s);
    if (Number.isNaN(v) && s !== "nan") throw new Error(`bad number ${s}`);
    return v;
  });
}

const QUALITIES = new Set(["Good", "Degraded", "Bad"]);

export function parseVitalsSample(text: string): VitalsSample {
  const kv = decodeKv(text);
  const quality = need(kv, "quality");
  if (!QUALITIES.has(quality)) throw new Error(`unknown quality ${quality}`);
  return {
    minuteIndex: num(kv, "minute_index"),
    heartRateBpm: num(kv, "heart_rate_bpm"),
    respirationBpm: num(kv, "respiration_bpm"),
    quality: quality as Quality,
  };
}

export function parseForecast(text: string): ForecastSeries {
  const kv = decodeKv(text);
  const series = {
    issuedAtMinute: num(kv, "issued_at_minute"),
    stepMinutes: num(kv, "step_minutes"),
    horizonSteps: num(kv, "horizon_steps"),
    heartRate: numberList(need(kv, "heart_rate")),
    respiration: numberList(need(kv, "respiration")),
  };
  if (
    series.heartRate.length !== series.horizonSteps ||
    series.respiration.length !== series.horizonSteps
  ) {
    throw new Error(
      `forecast length mismatch: ${series.heartRate.length}/${series.respiration.length}` +
        ` values for ${series.horizonSteps} steps`,
    );
  }
  return series;
}

function toLabel(name: string): ActivityLabel {
  if ((ACTIVITY_LABELS as readonly string[]).includes(name)) {
    return name as ActivityLabel;
  }
  throw new Error(`unknown activity label ${name}`);
}

export function parseActivity(text: string): ActivityDecision {
  const kv = decodeKv(text);
  const probs = numberList(need(kv, "probs"));
  if (probs.length !== ACTIVITY_LABELS.length) {
    throw new Error(`expected ${ACTIVITY_LABELS.length} probabilities, got ${probs.length}`);
  }
  const activeRaw = need(kv, "active_labels");
  const active = activeRaw === "" ? [] : activeRaw.split(",").map(toLabel);
  return {
    probabilities: probs,
    activeLabels: active,
    currentStatus: toLabel(need(kv, "current_status")),
  };
}

/** History bodies are a count line followed by blank-line-separated samples. */
export function parseHistory(text: string): VitalsSample[] {
  const trimmed = text.trim();
  const firstBreak = trimmed.indexOf("\n");
  const countLine = firstBreak === -1 ? trimmed : trimmed.slice(0, firstBreak);
  const count = Number(decodeKv(countLine)["count"]);
  if (!Number.isInteger(count)) throw new Error(`bad count line: ${countLine}`);
  const rest = firstBreak === -1 ? "" : trimmed.slice(firstBreak + 1);
  const blocks = rest
    .split("\n\n")
    .map((b) => b.trim())
    .filter((b) => b !== "");
  if (blocks.length !== count) {
    throw new Error(`count=${count} but ${blocks.length} samples in body`);
  }
  return blocks.map(parseVitalsSample);
}
