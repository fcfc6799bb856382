/** Display formatting. The API keeps similarities as reals in [0, 1];
 * turning them into percentages happens only here. */

export function formatPercent(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export function formatRelevance(value: number): string {
  return value.toFixed(2);
}
