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

#include "lincoup/experiment_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace lincoup {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto k : keys) known = known || key == k;
        if (!known) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + "." + key + ": " + e.what());
    }
}

template <class T>
void read_optional(const json& obj, const char* key, std::optional<T>& out, std::string_view where) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) {
        out.reset();
        return;
    }
    T v{};
    read(obj, key, v, where);
    out = v;
}

FamilySpec read_family(const json& j, std::string_view where) {
    reject_unknown(j, where, {"family", "params"});
    FamilySpec f;
    std::string name;
    read(j, "family", name, where);
    try {
        f.family = parse_family(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(where) + ".family: " + e.what());
    }
    if (f.family == Family::User) throw ConfigError(std::string(where) + ": user densities cannot be configured");
    read(j, "params", f.params, where);
    try {
        (void)DensityModel::from_spec(f);
    } catch (const std::exception& e) {
        throw ConfigError(std::string(where) + ": " + e.what());
    }
    return f;
}

json write_family(const FamilySpec& f) {
    return json{{"family", std::string(family_name(f.family))}, {"params", f.params}};
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
    const GridConfig& g = c.grids;
    if (!(g.z_min > 0.0) || !(g.z_max >= g.z_min)) throw ConfigError("grids: need 0 < z_min <= z_max");
    if (g.z_points == 0) throw ConfigError("grids.z_points: the z-grid is empty");
    if (!(g.x_min > 0.0) || !(g.x_max >= g.x_min)) throw ConfigError("grids: need 0 < x_min <= x_max");
    if (g.x_points == 0) throw ConfigError("grids.x_points: the x-grid is empty");
    if (g.quantile_levels < 1 || g.quantile_levels > 20) throw ConfigError("grids.quantile_levels: must be in [1, 20]");
    const RectangleSchedule& s = c.schedule;
    if (s.count == 0) throw ConfigError("rectangles.count: must be >= 1");
    if (!s.a.empty() && s.a.size() != s.count) throw ConfigError("rectangles.a: need one entry per rectangle");
    if (!s.b.empty() && s.b.size() != s.count) throw ConfigError("rectangles.b: need one entry per rectangle");
    if (!s.magnitudes.empty() && s.magnitudes.size() != s.count) {
        throw ConfigError("rectangles.magnitudes: need one entry per rectangle");
    }
    if (!(s.width_factor > 1.0)) throw ConfigError("rectangles.width_factor: must be > 1");
    if (!(s.delta_fraction > 0.0)) throw ConfigError("rectangles.delta_fraction: must be > 0");
    if (!(s.epsilon_fraction >= 0.0)) throw ConfigError("rectangles.epsilon_fraction: must be >= 0");
    if (s.delta_override && !(*s.delta_override > 0.0)) throw ConfigError("rectangles.delta: must be > 0");
    if (s.epsilon_override && !(*s.epsilon_override >= 0.0)) throw ConfigError("rectangles.epsilon: must be >= 0");
    if (s.nu_override && !(*s.nu_override > 0.0)) throw ConfigError("rectangles.nu: must be > 0");
    if (s.max_doublings < 0) throw ConfigError("rectangles.max_doublings: must be >= 0");
    if (!(s.points_per_period > 0.0)) throw ConfigError("rectangles.points_per_period: must be > 0");
    if (c.samples < 100) throw ConfigError("samples: at least 100 draws are required");
    if (c.binned_samples < 1000) throw ConfigError("binned_samples: at least 1000 draws are required");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha: must be in (0, 1)");
    if (c.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

ExperimentConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j, "config",
                   {"marginal1", "marginal2", "curve_method", "rectangles", "interpretation", "seed", "output_dir",
                    "grids", "samples", "binned_samples", "alpha", "export_samples"});
    ExperimentConfig c;
    if (j.contains("marginal1")) c.marginal1 = read_family(j["marginal1"], "marginal1");
    if (j.contains("marginal2")) c.marginal2 = read_family(j["marginal2"], "marginal2");
    std::string name;
    if (j.contains("curve_method")) {
        read(j, "curve_method", name, "config");
        try {
            c.curve_method = parse_curve_method(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("curve_method: ") + e.what());
        }
    }
    if (j.contains("interpretation")) {
        read(j, "interpretation", name, "config");
        try {
            c.interpretation = parse_interpretation(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("interpretation: ") + e.what());
        }
    }
    read(j, "seed", c.seed, "config");
    read(j, "output_dir", c.output_dir, "config");
    read(j, "samples", c.samples, "config");
    read(j, "binned_samples", c.binned_samples, "config");
    read(j, "alpha", c.alpha, "config");
    read(j, "export_samples", c.export_samples, "config");

    if (j.contains("rectangles")) {
        const json& r = j["rectangles"];
        constexpr std::string_view w = "rectangles";
        reject_unknown(r, w,
                       {"count", "a", "b", "width_factor", "delta_fraction", "epsilon_fraction", "magnitudes", "delta",
                        "epsilon", "nu", "max_doublings", "points_per_period"});
        RectangleSchedule& s = c.schedule;
        read(r, "count", s.count, w);
        read(r, "a", s.a, w);
        read(r, "b", s.b, w);
        read(r, "width_factor", s.width_factor, w);
        read(r, "delta_fraction", s.delta_fraction, w);
        read(r, "epsilon_fraction", s.epsilon_fraction, w);
        read(r, "magnitudes", s.magnitudes, w);
        read_optional(r, "delta", s.delta_override, w);
        read_optional(r, "epsilon", s.epsilon_override, w);
        read_optional(r, "nu", s.nu_override, w);
        read(r, "max_doublings", s.max_doublings, w);
        read(r, "points_per_period", s.points_per_period, w);
    }
    if (j.contains("grids")) {
        const json& g = j["grids"];
        constexpr std::string_view w = "grids";
        reject_unknown(g, w, {"z_min", "z_max", "z_points", "x_min", "x_max", "x_points", "quantile_levels"});
        read(g, "z_min", c.grids.z_min, w);
        read(g, "z_max", c.grids.z_max, w);
        read(g, "z_points", c.grids.z_points, w);
        read(g, "x_min", c.grids.x_min, w);
        read(g, "x_max", c.grids.x_max, w);
        read(g, "x_points", c.grids.x_points, w);
        read(g, "quantile_levels", c.grids.quantile_levels, w);
    }
    c.schedule.interpretation = c.interpretation;
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    const RectangleSchedule& s = c.schedule;
    const json j{
        {"marginal1", write_family(c.marginal1)},
        {"marginal2", write_family(c.marginal2)},
        {"curve_method", std::string(curve_method_name(c.curve_method))},
        {"interpretation", std::string(interpretation_name(c.interpretation))},
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"samples", c.samples},
        {"binned_samples", c.binned_samples},
        {"alpha", c.alpha},
        {"export_samples", c.export_samples},
        {"rectangles",
         {{"count", s.count},
          {"a", s.a},
          {"b", s.b},
          {"width_factor", s.width_factor},
          {"delta_fraction", s.delta_fraction},
          {"epsilon_fraction", s.epsilon_fraction},
          {"magnitudes", s.magnitudes},
          {"delta", optional_json(s.delta_override)},
          {"epsilon", optional_json(s.epsilon_override)},
          {"nu", optional_json(s.nu_override)},
          {"max_doublings", s.max_doublings},
          {"points_per_period", s.points_per_period}}},
        {"grids",
         {{"z_min", c.grids.z_min},
          {"z_max", c.grids.z_max},
          {"z_points", c.grids.z_points},
          {"x_min", c.grids.x_min},
          {"x_max", c.grids.x_max},
          {"x_points", c.grids.x_points},
          {"quantile_levels", c.grids.quantile_levels}}},
    };
    return j.dump(2);
}

}  // namespace lincoup
