/** Histogram-records file grammar (the hand-off format downstream). */

export const HIST_SCHEMA_TAG = '#lumibal hist-records v1';

export interface HistRecord {
  imageId: string;
  subjectId: string;
  cohort: string;
  counts: number[];
}

/** Serialize records to the versioned JSONL grammar.
 *
 * One compact JSON object per line after the schema tag, keys in a fixed
 * order, so identical inputs give identical bytes.
 */
export function renderRecords(records: HistRecord[]): string {
  const lines = [HIST_SCHEMA_TAG];
  for (const rec of records) {
    if (rec.counts.length !== 256) {
      throw new Error(`record ${rec.imageId}: expected 256 bins, got ${rec.counts.length}`);
    }
    lines.push(
      JSON.stringify({
        image_id: rec.imageId,
        subject_id: rec.subjectId,
        cohort: rec.cohort,
        counts: rec.counts,
      })
    );
  }
  return lines.join('\n') + '\n';
}

/** Parse a records file back; inverse of renderRecords (test support). */
export function parseRecords(text: string): HistRecord[] {
  const lines = text.split('\n');
  if (lines[0] !== HIST_SCHEMA_TAG) {
    throw new Error(`bad schema line ${JSON.stringify(lines[0])}`);
  }
  const out: HistRecord[] = [];
  for (const line of lines.slice(1)) {
    if (line.trim() === '') continue;
    const obj = JSON.parse(line);
    out.push({
      imageId: String(obj.image_id),
      subjectId: String(obj.subject_id),
      cohort: String(obj.cohort),
      counts: obj.counts,
    });
  }
  return out;
}
