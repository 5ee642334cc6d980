/** Input manifest parsing. */

import * as fs from 'fs';
import * as path from 'path';
import Papa from 'papaparse';

export interface ManifestRow {
  imageId: string;
  subjectId: string;
  cohort: string;
  /** resolved against the manifest's directory when relative */
  path: string;
}

const REQUIRED = ['image_id', 'subject_id', 'cohort', 'path'];

// media files are named after the id, so it has to stay path-safe
const ID_RE = /^[A-Za-z0-9._-]+$/;

export class ManifestError extends Error {}

/**
 * Read a manifest CSV with columns image_id, subject_id, cohort, path.
 *
 * Column order is free, extra columns are ignored, blank lines are
 * skipped.  Cohort must be A or B.  Relative image paths are taken
 * relative to the manifest file itself so a manifest can travel with its
 * images.
 */
export function readManifest(manifestPath: string): ManifestRow[] {
  let text: string;
  try {
    text = fs.readFileSync(manifestPath, 'utf-8');
  } catch (err) {
    throw new ManifestError(`cannot read manifest ${manifestPath}: ${message(err)}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    const where = first.row === undefined ? '' : ` (row ${first.row + 2})`;
    throw new ManifestError(`${manifestPath}: ${first.message}${where}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED) {
    if (!fields.includes(col)) {
      throw new ManifestError(`${manifestPath}: missing column ${JSON.stringify(col)}`);
    }
  }

  const baseDir = path.dirname(path.resolve(manifestPath));
  const rows: ManifestRow[] = [];
  parsed.data.forEach((rec, i) => {
    const lineno = i + 2;
    const imageId = (rec.image_id ?? '').trim();
    const subjectId = (rec.subject_id ?? '').trim();
    const cohort = (rec.cohort ?? '').trim();
    const imgPath = (rec.path ?? '').trim();
    if (!ID_RE.test(imageId)) {
      throw new ManifestError(`${manifestPath} row ${lineno}: bad image_id ${JSON.stringify(imageId)}`);
    }
    if (subjectId === '') {
      throw new ManifestError(`${manifestPath} row ${lineno}: empty subject_id`);
    }
    if (cohort !== 'A' && cohort !== 'B') {
      throw new ManifestError(`${manifestPath} row ${lineno}: cohort must be A or B, got ${JSON.stringify(cohort)}`);
    }
    if (imgPath === '') {
      throw new ManifestError(`${manifestPath} row ${lineno}: empty path`);
    }
    rows.push({
      imageId,
      subjectId,
      cohort,
      path: path.isAbsolute(imgPath) ? imgPath : path.join(baseDir, imgPath),
    });
  });
  return rows;
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
