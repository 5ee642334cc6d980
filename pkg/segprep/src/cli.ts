#!/usr/bin/env node
/** Command line entry point. */

import * as path from 'path';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { runBatch } from './batch';
import { ManifestError } from './manifest';
import { MASKABLE_CLASSES, parseSkinClasses } from './parse';

function defaultMediaDir(outPath: string): string {
  const dir = path.dirname(outPath);
  const stem = path.basename(outPath).replace(/\.[^.]*$/, '');
  return path.join(dir, `${stem}_media`);
}

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .scriptName('segprep')
    .command(
      'batch',
      'process a manifest of portraits into histogram records',
      y =>
        y
          .option('manifest', {
            type: 'string',
            demandOption: true,
            describe: 'CSV with columns image_id,subject_id,cohort,path',
          })
          .option('out', {
            type: 'string',
            demandOption: true,
            describe: 'histogram-records output file',
          })
          .option('log', {
            type: 'string',
            demandOption: true,
            describe: 'per-image status log (CSV, sorted by image_id)',
          })
          .option('media-dir', {
            type: 'string',
            describe: 'where crops and masks land (default: <out stem>_media next to --out)',
          })
          .option('workers', {
            type: 'number',
            default: 4,
            describe: 'max images processed in flight',
          })
          .option('skin-classes', {
            type: 'string',
            default: 'skin',
            describe: `comma list of classes counted as face skin (${MASKABLE_CLASSES.join(', ')})`,
          }),
      async args => {
        const workers = Math.floor(args.workers);
        if (!Number.isFinite(workers) || workers < 1) {
          throw new ManifestError(`--workers must be a positive integer, got ${args.workers}`);
        }
        const result = await runBatch({
          manifestPath: args.manifest,
          outPath: args.out,
          logPath: args.log,
          mediaDir: args['media-dir'] ?? defaultMediaDir(args.out),
          skinClasses: parseSkinClasses(args['skin-classes']),
          workers,
        });
        console.log(`batch: ${result.nOk} ok, ${result.nFailed} failed -> ${args.out}`);
        process.exitCode = result.nFailed > 0 ? 1 : 0;
      }
    )
    .demandCommand(1, 'specify a command, e.g. segprep batch')
    .strict()
    .fail((msg, err) => {
      if (err) throw err;
      console.error(`segprep: ${msg}`);
      process.exit(2);
    })
    .parseAsync();
  void argv;
  return typeof process.exitCode === 'number' ? process.exitCode : 0;
}

main().catch(err => {
  const msg = err instanceof Error ? err.message : String(err);
  console.error(`segprep: ${msg}`);
  process.exit(2);
});
