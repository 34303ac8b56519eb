#include "tracer/harness/datasets.hpp"

#include "tracer/core/rng.hpp"
#include "tracer/harness/idx.hpp"

#include <cmath>
#include <numbers>

namespace tracer::harness {

DataBatch two_moons(std::size_t n, double noise, std::uint64_t seed) {
    CounterRng rng(seed);
    DataBatch b;
    b.num_classes = 2;
    b.inputs.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        const double t = std::numbers::pi * rng.uniform();
        double x0 = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
        double x1 = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
        x0 += noise * rng.normal();
        x1 += noise * rng.normal();
        b.inputs.row(static_cast<Eigen::Index>(i)) << x0, x1;
        b.labels.push_back(y);
    }
    return b;
}

DataBatch gaussian_blobs(std::size_t n, int classes, double noise, std::uint64_t seed) {
    require(classes >= 2, "gaussian_blobs: need at least two classes");
    CounterRng rng(seed);
    DataBatch b;
    b.num_classes = classes;
    b.inputs.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % static_cast<std::size_t>(classes));
        const double angle = 2.0 * std::numbers::pi * y / classes;
        const double x0 = 3.0 * std::cos(angle) + noise * rng.normal();
        const double x1 = 3.0 * std::sin(angle) + noise * rng.normal();
        b.inputs.row(static_cast<Eigen::Index>(i)) << x0, x1;
        b.labels.push_back(y);
    }
    return b;
}

DataBatch xor_data(std::size_t n, double noise, std::uint64_t seed) {
    CounterRng rng(seed);
    DataBatch b;
    b.num_classes = 2;
    b.inputs.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform(-1.0, 1.0);
        const double v = rng.uniform(-1.0, 1.0);
        b.labels.push_back((u > 0.0) != (v > 0.0) ? 1 : 0);
        b.inputs.row(static_cast<Eigen::Index>(i)) << u + noise * rng.normal(), v + noise * rng.normal();
    }
    return b;
}

DataBatch flip_labels(const DataBatch& batch, double fraction, std::uint64_t seed) {
    require(batch.is_classification(), "flip_labels: needs classification labels");
    require(fraction >= 0.0 && fraction < 1.0, "flip_labels: fraction must lie in [0, 1)");
    DataBatch out = batch;
    if (fraction == 0.0) return out;
    require(batch.num_classes >= 2, "flip_labels: a single-class dataset cannot be flipped");
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(batch.size())));
    CounterRng rng(seed);
    const auto order = permutation(batch.size(), rng);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = order[k];
        const auto shift = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(batch.num_classes - 1)));
        out.labels[i] = (batch.labels[i] + shift) % batch.num_classes;
    }
    return out;
}

namespace {

DataBatch generate(const DatasetSpec& spec, std::size_t n, std::uint64_t split) {
    const std::uint64_t seed = derive_seed(spec.seed, Purpose::Dataset, split);
    if (spec.name == "two_moons") return two_moons(n, spec.noise, seed);
    if (spec.name == "gaussian_blobs") return gaussian_blobs(n, spec.classes, spec.noise, seed);
    if (spec.name == "xor") return xor_data(n, spec.noise, seed);
    throw TracerError("unknown dataset '" + spec.name + "'");
}

Dataset from_idx(const DatasetSpec& spec) {
    require(!spec.images.empty() && !spec.labels.empty(), "idx_file dataset needs images and labels paths");
    const auto images = read_idx(spec.images, kIdxImageMagic);
    const auto labels = read_idx(spec.labels, kIdxLabelMagic);
    const DataBatch all = idx_to_batch(images, labels, spec.classes);
    const std::size_t wanted = spec.n_train + spec.n_val + spec.n_test;
    require(wanted <= all.size(), "idx_file: requested more examples than the file holds");
    CounterRng rng(derive_seed(spec.seed, Purpose::Split));
    const auto order = permutation(all.size(), rng);
    auto take = [&](std::size_t begin, std::size_t count) {
        return all.select(std::span<const std::size_t>(order).subspan(begin, count));
    };
    Dataset d;
    d.train = take(0, spec.n_train);
    if (spec.n_val > 0) d.val = take(spec.n_train, spec.n_val);
    d.test = take(spec.n_train + spec.n_val, spec.n_test);
    return d;
}

}  // namespace

Dataset make_dataset(const DatasetSpec& spec) {
    Dataset d;
    if (spec.name == "idx_file") {
        d = from_idx(spec);
    } else {
        d.train = generate(spec, spec.n_train, 0);
        if (spec.n_val > 0) d.val = generate(spec, spec.n_val, 1);
        d.test = generate(spec, spec.n_test, 2);
    }
    d.train.validate();
    if (spec.flip_fraction > 0.0) {
        d.train = flip_labels(d.train, spec.flip_fraction, derive_seed(spec.seed, Purpose::LabelFlip, 0));
        if (spec.n_val > 0) d.val = flip_labels(d.val, spec.flip_fraction, derive_seed(spec.seed, Purpose::LabelFlip, 1));
    }
    return d;
}

}  // namespace tracer::harness
