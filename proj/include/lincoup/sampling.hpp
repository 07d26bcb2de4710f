// Copyright 2026-present the lincoup authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lincoup/coupling_curve.hpp"
#include "lincoup/marginal_models.hpp"
#include "lincoup/measure.hpp"

namespace lincoup {

enum class SampleSource { BaseCurve, Perturbed };

/// Which part of the measure a draw came from. Curve draws of a perturbed
/// batch come from the curve with mu1 and mu3 removed.
enum class SampleComponent : std::uint8_t { Curve = 0, ShiftedDown = 2, ShiftedUp = 4 };

struct SampleBatch {
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<SampleComponent> component;
    /// Index into the measure's rectangles, -1 for curve draws.
    std::vector<std::int32_t> rectangle;
    std::uint64_t seed = 0;
    SampleSource source = SampleSource::BaseCurve;
    /// Rectangles present in the sampled measure (perturbed source only).
    std::vector<std::int32_t> rectangles;

    std::size_t size() const { return x1.size(); }
    std::vector<double> products() const;
};

struct SamplerOptions {
    std::size_t block_size = 8192;
    /// 0: hardware concurrency.
    unsigned threads = 0;
};

/// X1 = F1^-1(U), X2 = phi(X1). Block b of the batch draws from an mt19937_64
/// seeded with (seed, b), so the result does not depend on the thread count.
SampleBatch sample_base(const MonotoneCurve& curve, const DensityModel& f1, std::size_t n, std::uint64_t seed,
                        const SamplerOptions& options = {});

/// Draws from the assembled measure by choosing a component by its mass and
/// inverting that component's one-dimensional cumulative distribution.
SampleBatch sample_perturbed(const AssembledMeasure& measure, std::size_t n, std::uint64_t seed,
                             const SamplerOptions& options = {});
SampleBatch sample_perturbed(const MeasureDescription& desc, std::size_t n, std::uint64_t seed,
                             const SamplerOptions& options = {});

/// CSV with header x1,x2,product.
void write_sample_csv(std::ostream& os, const SampleBatch& batch);

}  // namespace lincoup
