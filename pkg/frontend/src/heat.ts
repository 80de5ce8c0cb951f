// Per-line attention heat. Lines are binned into five intensity levels
// by accumulated fixation time:
//
//   level 0: no recorded fixation time
//   level 1: (0, 250) ms
//   level 2: [250, 750) ms
//   level 3: [750, 1500) ms
//   level 4: >= 1500 ms
//
// The cut points are a display choice (a line read for a quarter second
// starts to glow, a line stared at for 1.5 s is fully hot) and live only
// here; nothing downstream depends on them.

export const HEAT_BIN_EDGES_MS: readonly number[] = [250, 750, 1500];

export const HEAT_LEVEL_COUNT = 5;

export function heatLevel(totalFixationMs: number): number {
  if (!(totalFixationMs > 0)) return 0;
  let level = 1;
  for (const edge of HEAT_BIN_EDGES_MS) {
    if (totalFixationMs >= edge) level += 1;
  }
  return level;
}
