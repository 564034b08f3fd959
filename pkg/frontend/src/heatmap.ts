/**
 * Per-section attention heatmap: one horizontal band per profile bucket,
 * tinted by mean attention (higher attention = darker), neutral for empty
 * buckets.  Pure band computation; DOM painting lives in the app shell.
 */

export interface ProfileBucket {
  mean: number | null;
  count: number;
  max: number | null;
}

export interface SectionProfile {
  page_id: string;
  bucket_count: number;
  buckets: ProfileBucket[];
}

export interface Band {
  index: number;
  mean: number | null;
  /** CSS color for the band; empty buckets get the neutral tint. */
  color: string;
  /** HSL lightness in percent; lower = darker = more attention. */
  lightness: number;
}

export const NEUTRAL_LIGHTNESS = 96;
const HUE = 16; // warm tint
const MAX_LIGHTNESS = 90; // attention 0 (never emitted, but anchors the scale)
const MIN_LIGHTNESS = 32; // attention 100

export function attentionLightness(mean: number): number {
  const clamped = Math.max(0, Math.min(100, mean));
  return MAX_LIGHTNESS - (clamped / 100) * (MAX_LIGHTNESS - MIN_LIGHTNESS);
}

export function heatmapBands(profile: SectionProfile): Band[] {
  return profile.buckets.map((bucket, index) => {
    if (bucket.mean === null || bucket.count === 0) {
      return {
        index,
        mean: null,
        color: `hsl(${HUE}, 10%, ${NEUTRAL_LIGHTNESS}%)`,
        lightness: NEUTRAL_LIGHTNESS,
      };
    }
    const lightness = attentionLightness(bucket.mean);
    return {
      index,
      mean: bucket.mean,
      color: `hsl(${HUE}, 78%, ${lightness}%)`,
      lightness,
    };
  });
}

/** Index of the darkest band, or null when every bucket is empty. */
export function darkestBand(bands: Band[]): number | null {
  let best: number | null = null;
  for (const band of bands) {
    if (band.mean === null) continue;
    if (best === null || band.lightness < bands[best]!.lightness) best = band.index;
  }
  return best;
}
