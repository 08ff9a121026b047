/**
 * Parser for the solver's trace CSV files.
 *
 * Schema: header "iter,t,f_gap,grad_norm,energy,grad_evals", one row per
 * recorded iterate (energy may be empty for baseline methods), and a final
 * comment line "# outcome=<converged|budget_exhausted|diverged:ITER>".
 */

export const TRACE_HEADER = "iter,t,f_gap,grad_norm,energy,grad_evals";

export interface TraceRow {
  iter: number;
  t: number;
  fGap: number;
  gradNorm: number;
  /** null when the method records no energy (gd/nag). */
  energy: number | null;
  gradEvals: number;
}

export interface Trace {
  label: string;
  rows: TraceRow[];
  outcome: string;
  divergedIter: number | null;
}

export class TraceParseError extends Error {}

function parseNumber(token: string, line: number, field: string): number {
  const value = Number(token);
  if (token.trim() === "" || Number.isNaN(value)) {
    throw new TraceParseError(`line ${line}: field ${field} is not a number: "${token}"`);
  }
  return value;
}

export function parseTrace(text: string, label: string): Trace {
  const lines = text.split(/\r?\n/);
  if (lines.length === 0 || lines[0] !== TRACE_HEADER) {
    throw new TraceParseError(`line 1: expected header "${TRACE_HEADER}"`);
  }
  const rows: TraceRow[] = [];
  let outcome = "budget_exhausted";
  let divergedIter: number | null = null;
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    const lineNo = i + 1;
    if (line.trim() === "") continue;
    if (line.startsWith("#")) {
      const eq = line.indexOf("=");
      if (eq < 0) {
        throw new TraceParseError(`line ${lineNo}: malformed comment "${line}"`);
      }
      const tag = line.slice(eq + 1).trim();
      if (tag.startsWith("diverged")) {
        outcome = "diverged";
        const parts = tag.split(":");
        if (parts.length !== 2) {
          throw new TraceParseError(`line ${lineNo}: diverged tag missing iteration`);
        }
        divergedIter = parseNumber(parts[1], lineNo, "diverged_iter");
      } else {
        outcome = tag;
      }
      continue;
    }
    const fields = line.split(",");
    if (fields.length !== 6) {
      throw new TraceParseError(`line ${lineNo}: expected 6 fields, got ${fields.length}`);
    }
    rows.push({
      iter: parseNumber(fields[0], lineNo, "iter"),
      t: parseNumber(fields[1], lineNo, "t"),
      fGap: parseNumber(fields[2], lineNo, "f_gap"),
      gradNorm: parseNumber(fields[3], lineNo, "grad_norm"),
      energy: fields[4].trim() === "" ? null : parseNumber(fields[4], lineNo, "energy"),
      gradEvals: parseNumber(fields[5], lineNo, "grad_evals"),
    });
  }
  if (rows.length === 0) {
    throw new TraceParseError("trace has no data rows");
  }
  return { label, rows, outcome, divergedIter };
}
