//! GeoTIFF reading and writing.
//!
//! Scope is deliberately narrow: uncompressed, single-strip, pixel-interleaved
//! files with uniform `u8` or `f32` samples across bands — exactly what the
//! toolkit produces and consumes. Georeferencing uses the ModelPixelScale +
//! ModelTiepoint tag pair and the GDAL nodata convention, so outputs open in
//! standard GIS tools and their rasters load back bit-identically.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use tiff::decoder::{Decoder, DecodingResult};
use tiff::encoder::TiffEncoder;
use tiff::tags::Tag;

use crate::error::{Error, Result};
use crate::raster::{Band, BandData, GeoTransform, RasterGrid};

const COMPRESSION_NONE: u16 = 1;
const PHOTOMETRIC_MIN_IS_BLACK: u16 = 1;
const PLANAR_CHUNKY: u16 = 1;
const SAMPLE_FORMAT_UINT: u16 = 1;
const SAMPLE_FORMAT_IEEE_FP: u16 = 3;

fn same_nodata(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => x == y || (x.is_nan() && y.is_nan()),
        _ => false,
    }
}

fn uniform_nodata(grid: &RasterGrid) -> Result<Option<f64>> {
    let nodata = grid.bands[0].nodata;
    for (i, band) in grid.bands.iter().enumerate() {
        if !same_nodata(band.nodata, nodata) {
            return Err(Error::Data(format!(
                "band {i} nodata {:?} differs from band 0 ({nodata:?}); \
                 the GDAL nodata tag is file-wide",
                band.nodata
            )));
        }
    }
    Ok(nodata)
}

/// Write a raster as an uncompressed GeoTIFF. All bands must hold the same
/// sample type and share one nodata value (the tag is file-wide).
pub fn write_geotiff(path: &Path, grid: &RasterGrid) -> Result<()> {
    let nodata = uniform_nodata(grid)?;
    let n_bands = grid.bands.len();
    let all_u8 = grid.bands.iter().all(|b| matches!(b.data, BandData::U8(_)));
    let all_f32 = grid.bands.iter().all(|b| matches!(b.data, BandData::F32(_)));
    if !(all_u8 || all_f32) {
        return Err(Error::Data(
            "bands mix u8 and f32 samples; TIFF output requires a uniform sample type".into(),
        ));
    }

    let file = BufWriter::new(File::create(path)?);
    let mut encoder = TiffEncoder::new(file)?;
    let mut dir = encoder.image_directory()?;

    dir.write_tag(Tag::ImageWidth, grid.width as u32)?;
    dir.write_tag(Tag::ImageLength, grid.height as u32)?;
    dir.write_tag(Tag::Compression, COMPRESSION_NONE)?;
    dir.write_tag(Tag::PhotometricInterpretation, PHOTOMETRIC_MIN_IS_BLACK)?;
    dir.write_tag(Tag::SamplesPerPixel, n_bands as u16)?;
    dir.write_tag(Tag::PlanarConfiguration, PLANAR_CHUNKY)?;
    dir.write_tag(Tag::RowsPerStrip, grid.height as u32)?;

    let (bits, format) = if all_u8 {
        (8u16, SAMPLE_FORMAT_UINT)
    } else {
        (32u16, SAMPLE_FORMAT_IEEE_FP)
    };
    dir.write_tag(Tag::BitsPerSample, &vec![bits; n_bands][..])?;
    dir.write_tag(Tag::SampleFormat, &vec![format; n_bands][..])?;

    let t = &grid.transform;
    dir.write_tag(
        Tag::ModelPixelScaleTag,
        &[t.pixel_size_x, t.pixel_size_y, 0.0][..],
    )?;
    dir.write_tag(
        Tag::ModelTiepointTag,
        &[0.0, 0.0, 0.0, t.origin_x, t.origin_y, 0.0][..],
    )?;
    if let Some(nd) = nodata {
        dir.write_tag(Tag::GdalNodata, format!("{nd}").as_str())?;
    }

    let pixels = grid.width * grid.height;
    let (offset, byte_count) = if all_u8 {
        let mut data = vec![0u8; pixels * n_bands];
        for (b, band) in grid.bands.iter().enumerate() {
            let src = match &band.data {
                BandData::U8(v) => v,
                BandData::F32(_) => unreachable!("uniformity checked above"),
            };
            for (i, &v) in src.iter().enumerate() {
                data[i * n_bands + b] = v;
            }
        }
        (dir.write_data(&data[..])?, data.len())
    } else {
        let mut data = vec![0f32; pixels * n_bands];
        for (b, band) in grid.bands.iter().enumerate() {
            let src = match &band.data {
                BandData::F32(v) => v,
                BandData::U8(_) => unreachable!("uniformity checked above"),
            };
            for (i, &v) in src.iter().enumerate() {
                data[i * n_bands + b] = v;
            }
        }
        (dir.write_data(&data[..])?, data.len() * 4)
    };
    dir.write_tag(Tag::StripOffsets, &[offset as u32][..])?;
    dir.write_tag(Tag::StripByteCounts, &[byte_count as u32][..])?;
    dir.finish()?;
    Ok(())
}

fn read_transform(
    decoder: &mut Decoder<BufReader<File>>,
    height: usize,
) -> Result<GeoTransform> {
    let scale = decoder.find_tag(Tag::ModelPixelScaleTag)?;
    let tie = decoder.find_tag(Tag::ModelTiepointTag)?;
    if scale.is_none() || tie.is_none() {
        // Not georeferenced: fall back to a pixel-index frame (unit pixels,
        // origin so map y = rows-from-bottom).
        return GeoTransform::new(0.0, height as f64, 1.0, 1.0);
    }
    let scale = decoder.get_tag_f64_vec(Tag::ModelPixelScaleTag)?;
    let tie = decoder.get_tag_f64_vec(Tag::ModelTiepointTag)?;
    if scale.len() < 2 || tie.len() < 6 {
        return Err(Error::Data(format!(
            "malformed georeferencing tags: pixel scale has {} values, tiepoint {}",
            scale.len(),
            tie.len()
        )));
    }
    // The tiepoint anchors raster position (i, j) at map position (x, y);
    // shift back to pixel (0, 0).
    let origin_x = tie[3] - tie[0] * scale[0];
    let origin_y = tie[4] + tie[1] * scale[1];
    GeoTransform::new(origin_x, origin_y, scale[0], scale[1])
}

fn read_nodata(decoder: &mut Decoder<BufReader<File>>) -> Result<Option<f64>> {
    if decoder.find_tag(Tag::GdalNodata)?.is_none() {
        return Ok(None);
    }
    let raw = decoder.get_tag_ascii_string(Tag::GdalNodata)?;
    let trimmed = raw.trim_end_matches('\0').trim();
    match trimmed.parse::<f64>() {
        Ok(v) => Ok(Some(v)),
        Err(_) => Err(Error::Data(format!(
            "unparseable nodata tag value {trimmed:?}"
        ))),
    }
}

/// Read a GeoTIFF produced by [`write_geotiff`] (or any uncompressed
/// pixel-interleaved u8/f32 TIFF). Files without georeferencing tags get a
/// unit-pixel transform.
pub fn read_geotiff(path: &Path) -> Result<RasterGrid> {
    let file = BufReader::new(File::open(path)?);
    let mut decoder = Decoder::new(file)?;
    let (width, height) = decoder.dimensions()?;
    let (width, height) = (width as usize, height as usize);
    let n_bands: u16 = decoder
        .find_tag_unsigned(Tag::SamplesPerPixel)?
        .unwrap_or(1);
    let n_bands = n_bands as usize;
    if n_bands == 0 {
        return Err(Error::Data("TIFF declares zero samples per pixel".into()));
    }
    let transform = read_transform(&mut decoder, height)?;
    let nodata = read_nodata(&mut decoder)?;

    let pixels = width * height;
    let bands = match decoder.read_image()? {
        DecodingResult::U8(data) => {
            if data.len() != pixels * n_bands {
                return Err(Error::Data(format!(
                    "TIFF data length {} does not match {width}x{height}x{n_bands}",
                    data.len()
                )));
            }
            (0..n_bands)
                .map(|b| Band {
                    data: BandData::U8((0..pixels).map(|i| data[i * n_bands + b]).collect()),
                    nodata,
                })
                .collect()
        }
        DecodingResult::F32(data) => {
            if data.len() != pixels * n_bands {
                return Err(Error::Data(format!(
                    "TIFF data length {} does not match {width}x{height}x{n_bands}",
                    data.len()
                )));
            }
            (0..n_bands)
                .map(|b| Band {
                    data: BandData::F32((0..pixels).map(|i| data[i * n_bands + b]).collect()),
                    nodata,
                })
                .collect()
        }
        other => {
            return Err(Error::Data(format!(
                "unsupported TIFF sample type {other:?}; only u8 and f32 rasters are handled"
            )))
        }
    };
    RasterGrid::new(width, height, bands, transform)
}
