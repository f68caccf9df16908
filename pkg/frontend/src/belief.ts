// User belief curves for posterior fusion. 0.5 means "no information"; the
// bump raises (or lowers) the belief towards `confidence` around `center`.

export function gaussianBump(positions: number[], center: number, width: number,
                             confidence: number): number[] {
  if (width <= 0) throw new Error("width must be positive");
  if (confidence < 0 || confidence > 1) throw new Error("confidence must be in [0, 1]");
  const amplitude = confidence - 0.5;
  return positions.map((pos) => {
    const z = (pos - center) / width;
    const value = 0.5 + amplitude * Math.exp(-0.5 * z * z);
    return Math.min(1, Math.max(0, value));
  });
}
