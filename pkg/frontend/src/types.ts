export type Quality = "Good" | "Degraded" | "Bad";

export interface VitalsSample {
  minuteIndex: number;
  heartRateBpm: number;
  respirationBpm: number;
  quality: Quality;
}

export interface ForecastSeries {
  issuedAtMinute: number;
  stepMinutes: number;
  horizonSteps: number;
  heartRate: number[];
  respiration: number[];
}

export const ACTIVITY_LABELS = [
  "StandingStill",
  "ClimbingStairs",
  "SittingRelaxing",
  "LyingDown",
  "Walking",
  "WaistBendsForward",
  "Running",
  "FrontalElevationOfArms",
  "KneesBending",
  "JumpFrontBack",
] as const;

export type ActivityLabel = (typeof ACTIVITY_LABELS)[number];

export interface ActivityDecision {
  /** One probability per label, in ACTIVITY_LABELS order. */
  probabilities: number[];
  activeLabels: ActivityLabel[];
  currentStatus: ActivityLabel;
}

export interface SafeBandConfig {
  hrLowBpm: number;
  hrHighBpm: number;
  rrLowBpm: number;
  rrHighBpm: number;
  pollIntervalS: number;
}

export const DEFAULT_BANDS: SafeBandConfig = {
  hrLowBpm: 45,
  hrHighBpm: 120,
  rrLowBpm: 8,
  rrHighBpm: 25,
  pollIntervalS: 15,
};

/** Build a band config, rejecting inverted or empty bands. */
export function makeSafeBands(overrides: Partial<SafeBandConfig> = {}): SafeBandConfig {
  const bands = { ...DEFAULT_BANDS, ...overrides };
  if (!(bands.hrLowBpm < bands.hrHighBpm)) {
    throw new Error(`hr band inverted: [${bands.hrLowBpm}, ${bands.hrHighBpm}]`);
  }
  if (!(bands.rrLowBpm < bands.rrHighBpm)) {
    throw new Error(`rr band inverted: [${bands.rrLowBpm}, ${bands.rrHighBpm}]`);
  }
  if (!(bands.pollIntervalS > 0)) {
    throw new Error(`poll interval must be positive, got ${bands.pollIntervalS}`);
  }
  return bands;
}

export type Vital = "heart_rate" | "respiration";

export interface Alert {
  vital: Vital;
  /** 1-based forecast step that left the band. */
  step: number;
  /** Absolute minute the step refers to. */
  minute: number;
  valueBpm: number;
  lowBpm: number;
  highBpm: number;
}

export type ConnectionState = "live" | "warming" | "disconnected" | "offline";

export interface ViewState {
  patientId: string;
  connection: ConnectionState;
  vitals: VitalsSample | null;
  history: VitalsSample[];
  forecast: ForecastSeries | null;
  activity: ActivityDecision | null;
  alerts: Alert[];
  /** Wall-clock ms of the last successful data refresh, null before any. */
  lastUpdatedMs: number | null;
  /** True once the snapshot is older than two poll intervals. */
  stale: boolean;
}

export function initialViewState(patientId: string): ViewState {
  return {
    patientId,
    connection: "warming",
    vitals: null,
    history: [],
    forecast: null,
    activity: null,
    alerts: [],
    lastUpdatedMs: null,
    stale: false,
  };
}
