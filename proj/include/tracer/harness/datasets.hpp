#pragma once

#include "tracer/harness/config.hpp"
#include "tracer/models/data.hpp"

#include <cstdint>

namespace tracer::harness {

struct Dataset {
    DataBatch train;
    DataBatch val;   ///< empty when n_val == 0
    DataBatch test;
};

/// Two interleaving half circles with Gaussian jitter; labels alternate.
DataBatch two_moons(std::size_t n, double noise, std::uint64_t seed);
/// `classes` isotropic blobs centred on a circle of radius 3.
DataBatch gaussian_blobs(std::size_t n, int classes, double noise, std::uint64_t seed);
/// Uniform points in [-1, 1]^2 labelled by the sign of x0 * x1, then jittered.
DataBatch xor_data(std::size_t n, double noise, std::uint64_t seed);

/// Deterministic train/validation/test splits. Label flips apply to the train
/// and validation splits only; the test split keeps clean labels.
Dataset make_dataset(const DatasetSpec& spec);

/// Replaces exactly round(fraction * n) labels, chosen without replacement,
/// by a uniformly drawn different class.
DataBatch flip_labels(const DataBatch& batch, double fraction, std::uint64_t seed);

}  // namespace tracer::harness
