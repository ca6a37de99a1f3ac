//! Loading images and numeric matrices as grids.
//!
//! Lossless raster formats (PNG, BMP, TIFF, PGM/PPM) are decoded through the
//! `image` crate. JPEG is refused: its block artifacts distort local order.
//! Color pixels become `0.299 R + 0.587 G + 0.114 B` without re-quantizing.

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Luminance of one RGB pixel, kept as a real number.
pub fn to_gray(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Affine rescaling to the given mean and (population) standard deviation.
pub fn normalize(grid: &Grid, target_mean: f64, target_std: f64) -> Result<Grid> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    if !(target_std > 0.0) || !target_mean.is_finite() || !target_std.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target std must be positive and finite, got mean {target_mean}, std {target_std}"
        )));
    }
    let mean = grid.mean();
    let std = grid.std_dev();
    if std == 0.0 {
        return Err(Error::Degenerate("cannot normalize a constant grid".into()));
    }
    let scale = target_std / std;
    grid.map(|v| (v - mean) * scale + target_mean)
}

/// Dataset default: mean 127, standard deviation 40.
pub fn normalize_default(grid: &Grid) -> Result<Grid> {
    normalize(grid, 127.0, 40.0)
}

/// Cuts `grid_rows x grid_cols` non-overlapping tiles of `tile_rows x tile_cols`
/// from the top-left corner, in row-major order. Cells outside the tiled
/// region are ignored; partial tiles are never produced.
pub fn tile(grid: &Grid, tile_rows: usize, tile_cols: usize, grid_rows: usize, grid_cols: usize) -> Result<Vec<Grid>> {
    if tile_rows == 0 || tile_cols == 0 || grid_rows == 0 || grid_cols == 0 {
        return Err(Error::InvalidInput("tile sizes and counts must be positive".into()));
    }
    if tile_rows * grid_rows > grid.rows() || tile_cols * grid_cols > grid.cols() {
        return Err(Error::InvalidInput(format!(
            "{grid_rows}x{grid_cols} tiles of {tile_rows}x{tile_cols} do not fit a {}x{} grid",
            grid.rows(),
            grid.cols()
        )));
    }
    let mut tiles = Vec::with_capacity(grid_rows * grid_cols);
    for i in 0..grid_rows {
        for j in 0..grid_cols {
            tiles.push(grid.sub_grid(i * tile_rows, j * tile_cols, tile_rows, tile_cols)?);
        }
    }
    Ok(tiles)
}

/// True for file names the loader treats as numeric text matrices.
pub fn is_matrix_path(path: &Path) -> bool {
    matches!(
        extension(path).as_deref(),
        Some("csv" | "txt" | "tsv" | "dat")
    )
}

/// True for file names the loader accepts at all (including rejected JPEG,
/// which is reported rather than skipped).
pub fn is_supported_path(path: &Path) -> bool {
    is_matrix_path(path)
        || matches!(
            extension(path).as_deref(),
            Some("png" | "bmp" | "tif" | "tiff" | "pgm" | "ppm" | "pnm" | "pbm" | "jpg" | "jpeg")
        )
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

/// Loads an image or a numeric matrix file as a grid.
pub fn load_grid(path: &Path) -> Result<Grid> {
    if is_matrix_path(path) {
        let text = fs::read_to_string(path)?;
        return parse_matrix(&text).map_err(|e| match e {
            Error::InvalidInput(reason) => Error::Decode {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        });
    }
    let bytes = fs::read(path)?;
    decode_image(&bytes, path)
}

fn decode_image(bytes: &[u8], path: &Path) -> Result<Grid> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let is_jpeg = reader.format() == Some(ImageFormat::Jpeg)
        || bytes.starts_with(&[0xFF, 0xD8, 0xFF])
        || matches!(extension(path).as_deref(), Some("jpg" | "jpeg"));
    if is_jpeg {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "JPEG compression alters local pixel order; use a lossless format".into(),
        });
    }
    let image = reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    image_to_grid(&image).map_err(|reason| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason,
    })
}

/// Converts a decoded image: gray stays as is, color goes through [`to_gray`],
/// alpha is dropped. 16-bit samples keep their full range.
pub fn image_to_grid(image: &DynamicImage) -> std::result::Result<Grid, String> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let values: Vec<f64> = match image {
        DynamicImage::ImageLuma8(img) => img.pixels().map(|p| f64::from(p[0])).collect(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| f64::from(p[0])).collect(),
        DynamicImage::ImageLuma16(img) => img.pixels().map(|p| f64::from(p[0])).collect(),
        DynamicImage::ImageLumaA16(img) => img.pixels().map(|p| f64::from(p[0])).collect(),
        DynamicImage::ImageRgb8(img) => img
            .pixels()
            .map(|p| to_gray(p[0].into(), p[1].into(), p[2].into()))
            .collect(),
        DynamicImage::ImageRgba8(img) => img
            .pixels()
            .map(|p| to_gray(p[0].into(), p[1].into(), p[2].into()))
            .collect(),
        DynamicImage::ImageRgb16(img) => img
            .pixels()
            .map(|p| to_gray(p[0].into(), p[1].into(), p[2].into()))
            .collect(),
        DynamicImage::ImageRgba16(img) => img
            .pixels()
            .map(|p| to_gray(p[0].into(), p[1].into(), p[2].into()))
            .collect(),
        DynamicImage::ImageRgb32F(img) => img
            .pixels()
            .map(|p| to_gray(p[0].into(), p[1].into(), p[2].into()))
            .collect(),
        DynamicImage::ImageRgba32F(img) => img
            .pixels()
            .map(|p| to_gray(p[0].into(), p[1].into(), p[2].into()))
            .collect(),
        other => return Err(format!("unsupported pixel layout {:?}", other.color())),
    };
    Grid::new(h, w, values).map_err(|e| e.to_string())
}

/// Parses a text matrix: one row per line, numbers separated by commas,
/// semicolons or whitespace. Blank lines and lines starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<Grid> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("line {}: {t:?} is not a number", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    Grid::from_rows(&rows)
}

/// Writes a grid as comma-separated rows using shortest round-trip formatting.
pub fn write_matrix_csv(grid: &Grid, mut out: impl Write) -> std::io::Result<()> {
    for r in 0..grid.rows() {
        let line: Vec<String> = grid.row(r).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Writes a 16-bit binary graymap, mapping the grid range linearly onto 0..=65535.
pub fn write_pgm16(grid: &Grid, path: &Path) -> Result<()> {
    let (lo, hi) = grid
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels: Vec<u16> = grid
        .values()
        .iter()
        .map(|&v| ((v - lo) / span * 65535.0).round() as u16)
        .collect();
    let img = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(grid.cols() as u32, grid.rows() as u32, pixels)
        .ok_or_else(|| Error::InvalidInput("grid too large for an image".into()))?;
    img.save_with_format(path, ImageFormat::Pnm).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}
