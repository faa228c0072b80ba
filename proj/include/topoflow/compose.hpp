#pragma once

// Geometric split-and-combine: fusion masks from the target rasterization,
// stand-ins for the background and hand streams, and the final merge.

#include "topoflow/grid.hpp"
#include "topoflow/raster.hpp"

namespace topoflow {

struct FusionMasks {
  Mask hand;        // M_h: visible (unoccluded) hand
  Mask foreground;  // M_f: any hand or object surface
};

FusionMasks analytic_masks(const RasterBuffers& t_raster);

struct LayerSet {
  Image background;  // I_b
  Image object;      // I_o
  Image hand;        // I_h
  Mask hand_mask;    // M_h
  Mask foreground;   // M_f
};

// I = (I_h*M_h + I_o*(1 - M_h))*M_f + I_b*(1 - M_f), per pixel and channel.
// Throws SizeMismatch when the layers disagree in size.
Image fuse(const LayerSet& layers);

// Onion-peel fill: every round, each hole pixel with known 8-neighbours takes
// their rounded mean (neighbours known at the start of the round, scanned
// top-left to bottom-right), until no hole is left.
// Throws AllForeground when the mask leaves nothing to propagate from.
Image inpaint_background(const Image& source, const Mask& foreground);

// Hand pixels (instance == Hand) whose `valid` entry is 0 take the mean colour
// of the valid hand pixels on the same face, or the global valid-hand mean
// when the face has none. Throws NoVisibleHand if no hand pixel is valid.
Image fill_hand_holes(const Image& coarse_hand, const RasterBuffers& t_raster, const Mask& valid);

}  // namespace topoflow
