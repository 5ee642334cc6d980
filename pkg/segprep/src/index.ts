export { grayscaleLuma, lumaHistogram } from './luma';
export { detectFaces, isSkinRgb, alignmentWindow, FaceBox } from './detect';
export {
  FACE_CLASSES,
  FaceClass,
  MASKABLE_CLASSES,
  labelCrop,
  buildMask,
  parseSkinClasses,
} from './parse';
export { processOne, AdapterRecord, AdapterStatus, ProcessOptions, CROP_SIZE } from './adapter';
export { runBatch, BatchOptions, BatchResult } from './batch';
export { readManifest, ManifestRow, ManifestError } from './manifest';
export { renderRecords, parseRecords, HistRecord, HIST_SCHEMA_TAG } from './records';
export {
  RgbImage,
  GrayImage,
  Box,
  makeRgb,
  readRgbPng,
  readGrayPng,
  writeRgbPng,
  writeGrayPng,
  cropResizeNearest,
} from './raster';
