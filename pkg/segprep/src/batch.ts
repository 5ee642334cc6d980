/** Manifest-driven batch run: records file plus status log. */

import * as fs from 'fs';
import Papa from 'papaparse';
import { AdapterRecord, processOne, ProcessOptions } from './adapter';
import { readManifest } from './manifest';
import { FaceClass } from './parse';
import { HistRecord, renderRecords } from './records';

export interface BatchOptions {
  manifestPath: string;
  outPath: string;
  logPath: string;
  mediaDir: string;
  skinClasses: ReadonlySet<FaceClass>;
  /** max images in flight at once */
  workers: number;
}

export interface BatchResult {
  records: AdapterRecord[];
  nOk: number;
  nFailed: number;
}

/** Run `fn` over `items` with at most `limit` tasks in flight. */
async function mapPool<T, R>(items: T[], limit: number, fn: (item: T) => Promise<R>): Promise<R[]> {
  const out = new Array<R>(items.length);
  let next = 0;
  const lanes = Math.max(1, Math.min(limit, items.length));
  const runner = async () => {
    for (;;) {
      const i = next++;
      if (i >= items.length) return;
      out[i] = await fn(items[i]);
    }
  };
  await Promise.all(Array.from({ length: lanes }, runner));
  return out;
}

/**
 * Process every manifest row and write both output files.
 *
 * Rows run concurrently up to `workers`, but the records file and the
 * status log are written sorted by image_id, so output bytes do not
 * depend on scheduling.  The log carries one line per manifest row; ok
 * rows have an empty detail field.  Per-image failures (including IO
 * errors on the image itself) become logged statuses, never exceptions.
 */
export async function runBatch(opts: BatchOptions): Promise<BatchResult> {
  const rows = readManifest(opts.manifestPath);
  fs.mkdirSync(opts.mediaDir, { recursive: true });

  const processOpts: ProcessOptions = {
    mediaDir: opts.mediaDir,
    skinClasses: opts.skinClasses,
  };
  const records = await mapPool(rows, opts.workers, row => processOne(row, processOpts));
  records.sort((a, b) => (a.imageId < b.imageId ? -1 : a.imageId > b.imageId ? 1 : 0));

  const ok: HistRecord[] = [];
  for (const rec of records) {
    if (rec.status === 'ok' && rec.counts !== null) {
      ok.push({
        imageId: rec.imageId,
        subjectId: rec.subjectId,
        cohort: rec.cohort,
        counts: rec.counts,
      });
    }
  }
  fs.writeFileSync(opts.outPath, renderRecords(ok), 'utf-8');

  const log = Papa.unparse(
    {
      fields: ['image_id', 'status', 'detail'],
      data: records.map(r => [r.imageId, r.status, r.detail.replace(/\s+/g, ' ')]),
    },
    { newline: '\n' }
  );
  // unparse ends with a newline only for empty data; normalize to one
  fs.writeFileSync(opts.logPath, log.replace(/\n+$/, '') + '\n', 'utf-8');

  const nOk = ok.length;
  return { records, nOk, nFailed: records.length - nOk };
}
