#pragma once

#include "tracer/autodiff/tape.hpp"
#include "tracer/models/data.hpp"

#include <span>
#include <string>

namespace tracer {

/// A differentiable batch-mean loss L_B(w). Implementations are immutable
/// after construction and may be shared read-only across threads.
class Model {
public:
    virtual ~Model() = default;

    virtual std::size_t num_params() const = 0;

    /// Records the mean loss over `batch` at `w` onto `tape` and returns the
    /// scalar root.
    virtual ad::Var record_loss(ad::Tape& tape, std::span<const double> w,
                                const DataBatch& batch) const = 0;

    virtual std::string kind() const = 0;
};

}  // namespace tracer
