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

#include "lincoup/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "lincoup/kernels.hpp"
#include "lincoup/numerics.hpp"

namespace lincoup {

std::vector<double> SampleBatch::products() const {
    std::vector<double> out(x1.size());
    kernels::multiply(x1, x2, out);
    return out;
}

namespace {

// Open-interval uniform from the top 53 bits.
double to_unit(std::uint64_t r) { return (static_cast<double>(r >> 11) + 0.5) * 0x1p-53; }

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

// Runs fill(engine, begin, end) over fixed blocks on a pool of threads.
template <class Fill>
void run_blocks(std::size_t n, std::uint64_t seed, const SamplerOptions& opt, Fill&& fill) {
    const std::size_t block = std::max<std::size_t>(opt.block_size, 1);
    const std::size_t blocks = (n + block - 1) / block;
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(blocks, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
            try {
                auto engine = block_engine(seed, b);
                fill(engine, b * block, std::min(n, (b + 1) * block));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

double draw_quantile(const DensityModel& f, double u) {
    return u <= 0.5 ? f.quantile(u) : f.upper_quantile(1.0 - u);
}

void resize(SampleBatch& batch, std::size_t n) {
    batch.x1.resize(n);
    batch.x2.resize(n);
    batch.component.assign(n, SampleComponent::Curve);
    batch.rectangle.assign(n, -1);
}

// One arc of the curve that loses mass, with its removed mass below x.
struct RemovedArc {
    double lo, hi, mass;
    const PerturbedMeasure* measure;
    bool transfer;  // l3 rather than l1

    double removed_below(double x) const {
        const MonotoneCurve& c = measure->product().curve();
        if (!transfer) return measure->cumulative(x * c.phi(x));
        const double xbar = c.inverse(c.phi(x) + measure->spec().d);
        return measure->cumulative(xbar * c.phi(xbar));
    }
};

// Inverse transform for the curve with the arc masses removed. Targets below
// the middle are located with F1 from the left, the rest with the survival
// function from the right, so both tails keep their precision.
class ResidualCurve {
public:
    explicit ResidualCurve(const AssembledMeasure& m) : f1_(m.product().f1()) {
        for (const auto& r : m.rectangles()) {
            const PerturbationSpec& s = r->spec();
            const double mass = r->component_mass();
            if (mass == 0.0) continue;
            arcs_.push_back({s.a, s.a_prime, mass, r.get(), true});
            arcs_.push_back({s.b_prime, s.b, mass, r.get(), false});
            removed_ += 2.0 * mass;
        }
        std::sort(arcs_.begin(), arcs_.end(), [](const auto& l, const auto& r) { return l.lo < r.lo; });
    }

    double mass() const { return 1.0 - removed_; }

    double invert(double p) const { return p < 0.5 * mass() ? from_left(p) : from_right(mass() - p); }

private:
    double from_left(double p) const {
        double offset = 0.0;
        for (const auto& arc : arcs_) {
            if (p < f1_.cdf(arc.lo) - offset) break;
            if (p <= f1_.cdf(arc.hi) - offset - arc.mass) {
                auto f = [&](double x) { return f1_.cdf(x) - offset - arc.removed_below(x) - p; };
                return numerics::brent(f, arc.lo, arc.hi);
            }
            offset += arc.mass;
        }
        return f1_.quantile(p + offset);
    }

    double from_right(double q) const {
        double offset = 0.0;
        for (auto it = arcs_.rbegin(); it != arcs_.rend(); ++it) {
            const RemovedArc& arc = *it;
            if (q < f1_.survival(arc.hi) - offset) break;
            if (q <= f1_.survival(arc.lo) - offset - arc.mass) {
                auto f = [&](double x) { return q - (f1_.survival(x) - offset - (arc.mass - arc.removed_below(x))); };
                return numerics::brent(f, arc.lo, arc.hi);
            }
            offset += arc.mass;
        }
        return f1_.upper_quantile(q + offset);
    }

    DensityModel f1_;
    std::vector<RemovedArc> arcs_;
    double removed_ = 0.0;
};

}  // namespace

SampleBatch sample_base(const MonotoneCurve& curve, const DensityModel& f1, std::size_t n, std::uint64_t seed,
                        const SamplerOptions& options) {
    if (n == 0) throw std::invalid_argument("sample_base: n must be >= 1");
    SampleBatch batch;
    batch.seed = seed;
    batch.source = SampleSource::BaseCurve;
    resize(batch, n);
    run_blocks(n, seed, options, [&](std::mt19937_64& engine, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double x = draw_quantile(f1, to_unit(engine()));
            batch.x1[i] = x;
            batch.x2[i] = curve.phi(x);
        }
    });
    return batch;
}

SampleBatch sample_perturbed(const AssembledMeasure& measure, std::size_t n, std::uint64_t seed,
                             const SamplerOptions& options) {
    if (n == 0) throw std::invalid_argument("sample_perturbed: n must be >= 1");
    const ResidualCurve residual(measure);
    const auto& rects = measure.rectangles();
    const MonotoneCurve& curve = measure.product().curve();
    std::size_t last_rect = 0;
    for (std::size_t r = 0; r < rects.size(); ++r) {
        if (rects[r]->component_mass() > 0.0) last_rect = r;
    }

    SampleBatch batch;
    batch.seed = seed;
    batch.source = SampleSource::Perturbed;
    for (std::size_t r = 0; r < rects.size(); ++r) batch.rectangles.push_back(static_cast<std::int32_t>(r));
    resize(batch, n);

    run_blocks(n, seed, options, [&](std::mt19937_64& engine, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double u = to_unit(engine());
            if (u < residual.mass()) {
                const double x = residual.invert(u);
                batch.x1[i] = x;
                batch.x2[i] = curve.phi(x);
                continue;
            }
            double v = u - residual.mass();
            bool placed = false;
            for (std::size_t r = 0; r < rects.size() && !placed; ++r) {
                const PerturbedMeasure& pm = *rects[r];
                const double m = pm.component_mass();
                if (m == 0.0) continue;
                for (const bool down : {true, false}) {
                    // The last component absorbs rounding in v.
                    const bool last = r == last_rect && !down;
                    if (v >= m && !last) {
                        v -= m;
                        continue;
                    }
                    const double z = pm.inverse_cumulative(std::min(v, m));
                    const PerturbationSpec& s = pm.spec();
                    const double xbar = std::clamp(measure.product().rho(z), s.b_prime, s.b);
                    const double ybar = curve.phi(xbar);
                    if (down) {
                        batch.x1[i] = xbar;
                        batch.x2[i] = ybar - s.d;
                        batch.component[i] = SampleComponent::ShiftedDown;
                    } else {
                        batch.x1[i] = pm.transfer_partner(xbar);
                        batch.x2[i] = ybar;
                        batch.component[i] = SampleComponent::ShiftedUp;
                    }
                    batch.rectangle[i] = static_cast<std::int32_t>(r);
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                std::ostringstream os;
                os << "sample_perturbed: uniform " << u << " fell outside every component";
                throw std::logic_error(os.str());
            }
        }
    });
    return batch;
}

SampleBatch sample_perturbed(const MeasureDescription& desc, std::size_t n, std::uint64_t seed,
                             const SamplerOptions& options) {
    return sample_perturbed(AssembledMeasure::from_description(desc), n, seed, options);
}

void write_sample_csv(std::ostream& os, const SampleBatch& batch) {
    os << "x1,x2,product\n" << std::setprecision(17);
    const std::vector<double> z = batch.products();
    for (std::size_t i = 0; i < batch.size(); ++i) os << batch.x1[i] << ',' << batch.x2[i] << ',' << z[i] << '\n';
}

}  // namespace lincoup
