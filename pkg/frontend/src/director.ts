/**
 * Director decomposition of the order parameter, re-implemented on the raw
 * snapshot arrays: Q = [[p, q], [q, -p]] = (s/2)[[cos 2t, sin 2t], [sin 2t, -cos 2t]]
 * with s = 2 sqrt(p^2 + q^2) and t = atan2(q, p)/2 in (-pi/2, pi/2].
 * Where s is below the floor the angle is ill-conditioned and set to 0,
 * matching the solver's convention.
 */

export interface DirectorField {
  s: Float64Array;
  theta: Float64Array;
}

export function directorDecompose(
  p: Float64Array,
  q: Float64Array,
  sFloor = 1e-8,
): DirectorField {
  if (p.length !== q.length) {
    throw new Error(`p and q lengths differ: ${p.length} vs ${q.length}`);
  }
  const s = new Float64Array(p.length);
  const theta = new Float64Array(p.length);
  for (let i = 0; i < p.length; ++i) {
    const si = 2 * Math.hypot(p[i], q[i]);
    s[i] = si;
    theta[i] = si > sFloor ? 0.5 * Math.atan2(q[i], p[i]) : 0;
  }
  return { s, theta };
}
