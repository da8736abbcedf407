// View-state transitions. Every poll produces a PollOutcome; applyPoll
// folds it into the previous ViewState without mutating either.

import { evaluateForecastAlerts } from "./alerts.js";
import {
  ActivityDecision,
  ForecastSeries,
  SafeBandConfig,
  ViewState,
  VitalsSample,
} from "./types.js";

/** A query either answered, or the service said it has nothing yet (503). */
export type EndpointResult<T> = { kind: "ok"; value: T } | { kind: "warming" };

export type PollOutcome =
  | {
      kind: "snapshot";
      vitals: EndpointResult<VitalsSample>;
      forecast: EndpointResult<ForecastSeries>;
      activity: EndpointResult<ActivityDecision>;
      history: VitalsSample[];
    }
  | { kind: "unreachable"; reason: string };

export function isStale(state: ViewState, nowMs: number, bands: SafeBandConfig): boolean {
  if (state.lastUpdatedMs === null) return false;
  return nowMs - state.lastUpdatedMs > 2 * bands.pollIntervalS * 1000;
}

export function applyPoll(
  prev: ViewState,
  outcome: PollOutcome,
  nowMs: number,
  bands: SafeBandConfig,
): ViewState {
  if (outcome.kind === "unreachable") {
    // keep the last snapshot on screen; the badge carries the bad news
    const next: ViewState = { ...prev, connection: "disconnected" };
    next.stale = isStale(next, nowMs, bands);
    return next;
  }

  const gotAnything =
    outcome.vitals.kind === "ok" ||
    outcome.forecast.kind === "ok" ||
    outcome.activity.kind === "ok";

  const vitals = outcome.vitals.kind === "ok" ? outcome.vitals.value : prev.vitals;
  const forecast = outcome.forecast.kind === "ok" ? outcome.forecast.value : prev.forecast;
  const activity = outcome.activity.kind === "ok" ? outcome.activity.value : prev.activity;

  const next: ViewState = {
    ...prev,
    connection: gotAnything ? "live" : "warming",
    vitals,
    history: outcome.history.length > 0 ? outcome.history : prev.history,
    forecast,
    activity,
    alerts: forecast ? evaluateForecastAlerts(forecast, bands) : [],
    lastUpdatedMs: gotAnything ? nowMs : prev.lastUpdatedMs,
  };
  next.stale = isStale(next, nowMs, bands);
  return next;
}
