#!/usr/bin/env node
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { extract } from './extract'

async function main() {
  const argv = await yargs(hideBin(process.argv))
    .scriptName('extract-features')
    .option('model', {
      type: 'string',
      demandOption: true,
      describe: 'tfjs model.json path, or "identity" for the flatten-only extractor',
    })
    .option('bundle', {
      type: 'string',
      demandOption: true,
      describe: 'dataset bundle directory (manifest.json + NPY tensors)',
    })
    .option('name', { type: 'string', demandOption: true, describe: 'extractor name' })
    .option('out', { type: 'string', demandOption: true, describe: 'output source directory' })
    .option('batch', { type: 'number', default: 32, describe: 'inference batch size' })
    .option('layer', { type: 'string', describe: 'feature layer name override' })
    .strict()
    .help()
    .parse()

  const outDir = await extract({
    modelPath: argv.model,
    bundleDir: argv.bundle,
    name: argv.name,
    outDir: argv.out,
    batchSize: argv.batch,
    layerName: argv.layer,
  })
  console.log(outDir)
}

main().catch(err => {
  console.error(`error: ${err.message ?? err}`)
  process.exit(1)
})
