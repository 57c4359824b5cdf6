#pragma once

#include "utilenhance/cascade.hpp"
#include "utilenhance/imgio.hpp"

namespace utilenhance {

/// Brightness correction: out = round(255 * (in/255)^gamma) per channel.
RasterImage gamma_transform(const RasterImage& img, double gamma);

/// Color correction: gray-world white balance. Each channel is scaled by
/// min(mean/channel_mean, max_gain); a zero channel mean gets max_gain.
RasterImage white_balance(const RasterImage& img, double max_gain);

/// Clarity correction: per-channel median over a window x window
/// neighbourhood with edge replication at the borders.
RasterImage median_filter(const RasterImage& img, int window);

/// Contrast correction: contrast-limited adaptive histogram equalization on
/// luma, with the RGB triple rescaled by new_luma / old_luma.
///
/// Tiles per axis are clamped to the image dimension. Each tile histogram is
/// clipped at clip * tile_pixels / 256 and the excess spread evenly over all
/// 256 bins in one pass; the tile mapping is round(255 * cdf(v)). A tile whose
/// raw histogram has a single occupied level maps identically. Pixel values
/// are bilinear blends of the four nearest tile mappings (tile centres),
/// clamped to the nearest tile along the borders.
RasterImage clahe(const RasterImage& img, double clip, int tiles);

/// Apply one correction with the given parameters.
RasterImage apply_correction(const RasterImage& img, CorrectionKind kind, const CorrectionParams& params);

/// Applies the plan's steps in order. Throws DuplicateCorrection if a kind repeats.
RasterImage apply_cascade(const RasterImage& img, const CascadePlan& plan);

}  // namespace utilenhance
