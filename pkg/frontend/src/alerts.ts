// The alert predicate: a pure function from a forecast and the safe bands
// to the list of out-of-band points. No network, no clock, no state.

import { Alert, ForecastSeries, SafeBandConfig } from "./types.js";

export function evaluateForecastAlerts(
  series: ForecastSeries,
  bands: SafeBandConfig,
): Alert[] {
  const alerts: Alert[] = [];
  for (let i = 0; i < series.horizonSteps; i++) {
    const step = i + 1;
    const minute = series.issuedAtMinute + series.stepMinutes * step - 1;
    const hr = series.heartRate[i];
    if (hr < bands.hrLowBpm || hr > bands.hrHighBpm) {
      alerts.push({
        vital: "heart_rate",
        step,
        minute,
        valueBpm: hr,
        lowBpm: bands.hrLowBpm,
        highBpm: bands.hrHighBpm,
      });
    }
    const rr = series.respiration[i];
    if (rr < bands.rrLowBpm || rr > bands.rrHighBpm) {
      alerts.push({
        vital: "respiration",
        step,
        minute,
        valueBpm: rr,
        lowBpm: bands.rrLowBpm,
        highBpm: bands.rrHighBpm,
      });
    }
  }
  return alerts;
}

export function describeAlert(a: Alert): string {
  const side = a.valueBpm > a.highBpm ? `above ${a.highBpm}` : `below ${a.lowBpm}`;
  return (
    `${a.vital} forecast step ${a.step} (minute ${a.minute})` +
    ` at ${a.valueBpm.toFixed(1)} bpm, ${side}`
  );
}
