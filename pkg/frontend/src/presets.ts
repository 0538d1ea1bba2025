/** Axis configuration for each simulator figure preset. */
import { FigureSpec } from "./figure.js";

const MI_LABEL = "Mutual information (bits/s/Hz)";
const RATE_LABEL = "Ergodic sum rate (bits/s/Hz)";

export const FIGURE_PRESETS: Record<string, FigureSpec> = {
  fig_mi_vs_snr: {
    xColumn: "snr_db",
    xLabel: "SNR (dB)",
    yLabel: MI_LABEL,
  },
  fig_mi_vs_nrf_fixed_nr: {
    xColumn: "n_rf",
    xLabel: "Number of RF chains",
    yLabel: MI_LABEL,
    logX: true,
  },
  fig_mi_vs_nrf_fixed_ratio: {
    xColumn: "n_rf",
    xLabel: "Number of RF chains",
    yLabel: MI_LABEL,
    logX: true,
  },
  fig_rate_vs_snr: {
    xColumn: "snr_db",
    xLabel: "SNR (dB)",
    yLabel: RATE_LABEL,
  },
  fig_rate_vs_nrf: {
    xColumn: "n_rf",
    xLabel: "Number of RF chains",
    yLabel: RATE_LABEL,
  },
  fig_rate_vs_bits: {
    xColumn: "bits",
    xLabel: "ADC resolution (bits)",
    yLabel: RATE_LABEL,
  },
  fig_theory_vs_sim: {
    xColumn: "snr_db",
    xLabel: "SNR (dB)",
    yLabel: RATE_LABEL,
  },
};

export function presetSpec(name: string): FigureSpec {
  const spec = FIGURE_PRESETS[name];
  if (!spec) {
    const known = Object.keys(FIGURE_PRESETS).join(", ");
    throw new Error(`unknown preset '${name}' (known: ${known})`);
  }
  return spec;
}
