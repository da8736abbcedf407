// Offline replay: build a ViewState from the four CSV reports the CLI
// demo writes, so the dashboard renders without a live service.

import { evaluateForecastAlerts } from "./alerts.js";
import {
  ACTIVITY_LABELS,
  ActivityDecision,
  ActivityLabel,
  ForecastSeries,
  Quality,
  SafeBandConfig,
  ViewState,
  VitalsSample,
} from "./types.js";

function rows(text: string, expectedHeader: string): string[][] {
  const lines = text.split("\n").filter((l) => l.trim() !== "");
  if (lines.length === 0 || lines[0] !== expectedHeader) {
    throw new Error(
      `expected header ${JSON.stringify(expectedHeader)}, got ${JSON.stringify(lines[0] ?? "")}`,
    );
  }
  return lines.slice(1).map((l) => l.split(","));
}

function asNumber(field: string, what: string): number {
  const v = Number(field);
  if (Number.isNaN(v) && field !== "nan") throw new Error(`bad ${what}: ${field}`);
  return v;
}

export function parseVitalsCsv(text: string): VitalsSample[] {
  return rows(text, "minute,heart_rate,respiration,quality").map((f) => {
    if (f.length !== 4) throw new Error(`vitals row needs 4 fields, got ${f.length}`);
    if (!["Good", "Degraded", "Bad"].includes(f[3])) {
      throw new Error(`unknown quality ${f[3]}`);
    }
    return {
      minuteIndex: asNumber(f[0], "minute"),
      heartRateBpm: asNumber(f[1], "heart_rate"),
      respirationBpm: asNumber(f[2], "respiration"),
      quality: f[3] as Quality,
    };
  });
}

export function parseForecastCsv(text: string): ForecastSeries {
  const body = rows(text, "issued_at_minute,step,minute,heart_rate_bpm,respiration_bpm");
  if (body.length === 0) throw new Error("forecast CSV has no rows");
  const issued = asNumber(body[0][0], "issued_at_minute");
  const heartRate: number[] = [];
  const respiration: number[] = [];
  body.forEach((f, i) => {
    if (f.length !== 5) throw new Error(`forecast row needs 5 fields, got ${f.length}`);
    if (asNumber(f[1], "step") !== i + 1) throw new Error(`steps out of order at row ${i + 1}`);
    heartRate.push(asNumber(f[3], "heart_rate_bpm"));
    respiration.push(asNumber(f[4], "respiration_bpm"));
  });
  const stepMinutes =
    body.length > 1
      ? asNumber(body[1][2], "minute") - asNumber(body[0][2], "minute")
      : 15;
  return {
    issuedAtMinute: issued,
    stepMinutes,
    horizonSteps: body.length,
    heartRate,
    respiration,
  };
}

function toLabel(name: string): ActivityLabel {
  if ((ACTIVITY_LABELS as readonly string[]).includes(name)) return name as ActivityLabel;
  throw new Error(`unknown activity label ${name}`);
}

/**
 * The reports carry one decision per motion window; the dashboard shows
 * the latest. Active labels are reconstructed from the probability table
 * with the standard 0.5 threshold.
 */
export function parseActivityCsvs(
  activityText: string,
  probabilitiesText: string,
): ActivityDecision {
  const statusRows = rows(activityText, "start_ms,current_status");
  if (statusRows.length === 0) throw new Error("activity CSV has no rows");
  const probHeader = "start_ms," + ACTIVITY_LABELS.map((l) => `p_${l}`).join(",");
  const probRows = rows(probabilitiesText, probHeader);
  if (probRows.length !== statusRows.length) {
    throw new Error(
      `activity and probability row counts differ: ${statusRows.length} vs ${probRows.length}`,
    );
  }
  const last = statusRows[statusRows.length - 1];
  const lastProbs = probRows[probRows.length - 1];
  const probabilities = lastProbs.slice(1).map((p) => asNumber(p, "probability"));
  if (probabilities.length !== ACTIVITY_LABELS.length) {
    throw new Error(`expected ${ACTIVITY_LABELS.length} probabilities`);
  }
  return {
    probabilities,
    activeLabels: ACTIVITY_LABELS.filter((_, i) => probabilities[i] >= 0.5),
    currentStatus: toLabel(last[1]),
  };
}

export interface DemoReports {
  vitals: string;
  forecast: string;
  activity: string;
  probabilities: string;
}

export function buildOfflineState(
  reports: DemoReports,
  bands: SafeBandConfig,
  patientId = "demo",
): ViewState {
  const timeline = parseVitalsCsv(reports.vitals);
  if (timeline.length === 0) throw new Error("vitals CSV has no rows");
  const forecast = parseForecastCsv(reports.forecast);
  const activity = parseActivityCsvs(reports.activity, reports.probabilities);
  return {
    patientId,
    connection: "offline",
    vitals: timeline[timeline.length - 1],
    history: timeline.slice(-75),
    forecast,
    activity,
    alerts: evaluateForecastAlerts(forecast, bands),
    lastUpdatedMs: null,
    stale: false,
  };
}
