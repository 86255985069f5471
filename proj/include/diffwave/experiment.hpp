#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "diffwave/dictionary_io.hpp"
#include "diffwave/error.hpp"
#include "diffwave/evaluation.hpp"
#include "diffwave/geodesic.hpp"
#include "diffwave/laplacian.hpp"
#include "diffwave/matching.hpp"
#include "diffwave/mesh.hpp"
#include "diffwave/sampling.hpp"
#include "diffwave/spectral.hpp"
#include "diffwave/spectrum.hpp"
#include "diffwave/wavelets.hpp"

namespace diffwave {

// ---------------------------------------------------------------------------
// Configuration

enum class ExperimentKind { self_match, pair_match, sampling, noise, tmax_sweep, wavelet_compare, timing };

inline ExperimentKind parse_experiment_kind(const std::string& s) {
    static const std::map<std::string, ExperimentKind> kinds = {
        {"self-match", ExperimentKind::self_match},   {"pair-match", ExperimentKind::pair_match},
        {"sampling", ExperimentKind::sampling},       {"noise", ExperimentKind::noise},
        {"tmax-sweep", ExperimentKind::tmax_sweep},   {"wavelet-compare", ExperimentKind::wavelet_compare},
        {"timing", ExperimentKind::timing},
    };
    const auto it = kinds.find(s);
    if (it == kinds.end()) throw UsageError("unknown experiment kind '" + s + "'");
    return it->second;
}

/// Parsed `key=value` experiment description. Unknown keys are rejected.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::self_match;
    std::filesystem::path mesh;
    std::vector<std::filesystem::path> targets;
    std::vector<std::filesystem::path> ground_truths;
    std::optional<std::filesystem::path> landmarks_src;
    std::optional<std::filesystem::path> landmarks_dst;
    std::filesystem::path out_dir = ".";
    std::vector<Index> samples = {6};
    std::vector<Index> scales = {25};
    std::vector<double> tmax = {1.0};
    SamplingStrategy strategy = SamplingStrategy::fps_euclidean;
    std::vector<SamplingStrategy> strategies = {SamplingStrategy::fps_euclidean, SamplingStrategy::fps_geodesic,
                                                SamplingStrategy::random};
    std::uint64_t seed = 0;
    std::vector<double> noise_radii = {0.01, 0.02, 0.05, 0.1};
    std::vector<Index> noise_counts = {1, 2, 3, 5, 10};
    Index n_thresholds = 100;
    double max_threshold = 0.5;
    Index eig_cap = 5000;
    Index truncation = kDefaultTruncation;
    ReferenceTimes reference = ReferenceTimes::linear_nt;
    Index workers = 0;  // 0: hardware concurrency
};

namespace detail {

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, Parse&& parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        if (!t.empty()) out.push_back(parse(std::string(t)));
    }
    if (out.empty()) throw UsageError("empty list '" + value + "'");
    return out;
}

inline long long parse_int(const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw UsageError("invalid integer '" + s + "'");
    }
    if (pos != s.size()) throw UsageError("invalid integer '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UsageError("invalid number '" + s + "'");
    }
    if (pos != s.size()) throw UsageError("invalid number '" + s + "'");
    return v;
}

}  // namespace detail

/// Parses an experiment config. Relative paths are resolved against `base_dir`.
inline ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    std::size_t line = 0;
    const auto path = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    const auto as_index = [](const std::string& s) { return static_cast<Index>(detail::parse_int(s)); };
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const auto content = std::string(detail::trim(raw));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected key=value");
        const std::string key(detail::trim(std::string_view(content).substr(0, eq)));
        const std::string value(detail::trim(std::string_view(content).substr(eq + 1)));
        if (!seen.insert(key).second) throw ParseError(line, "duplicate key '" + key + "'");
        try {
            if (key == "kind") cfg.kind = parse_experiment_kind(value);
            else if (key == "mesh") cfg.mesh = path(value);
            else if (key == "target") cfg.targets = detail::parse_list<std::filesystem::path>(value, path);
            else if (key == "gt") cfg.ground_truths = detail::parse_list<std::filesystem::path>(value, path);
            else if (key == "landmarks_src") cfg.landmarks_src = path(value);
            else if (key == "landmarks_dst") cfg.landmarks_dst = path(value);
            else if (key == "out_dir") cfg.out_dir = path(value);
            else if (key == "samples") cfg.samples = detail::parse_list<Index>(value, as_index);
            else if (key == "scales") cfg.scales = detail::parse_list<Index>(value, as_index);
            else if (key == "tmax") cfg.tmax = detail::parse_list<double>(value, detail::parse_double);
            else if (key == "strategy") cfg.strategy = parse_sampling_strategy(value);
            else if (key == "strategies")
                cfg.strategies = detail::parse_list<SamplingStrategy>(
                    value, [](const std::string& s) { return parse_sampling_strategy(s); });
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value));
            else if (key == "noise_radii") cfg.noise_radii = detail::parse_list<double>(value, detail::parse_double);
            else if (key == "noise_counts") cfg.noise_counts = detail::parse_list<Index>(value, as_index);
            else if (key == "n_thresholds") cfg.n_thresholds = as_index(value);
            else if (key == "max_threshold") cfg.max_threshold = detail::parse_double(value);
            else if (key == "eig_cap") cfg.eig_cap = as_index(value);
            else if (key == "truncation") cfg.truncation = as_index(value);
            else if (key == "reference") {
                if (value == "log") cfg.reference = ReferenceTimes::log_nt;
                else if (value == "linear") cfg.reference = ReferenceTimes::linear_nt;
                else throw UsageError("reference must be 'log' or 'linear'");
            } else if (key == "workers") cfg.workers = as_index(value);
            else throw ParseError(line, "unknown key '" + key + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line, key + ": " + e.what());
        }
    }
    if (!seen.count("kind")) throw UsageError("config is missing 'kind'");
    if (!seen.count("mesh")) throw UsageError("config is missing 'mesh'");
    if (!cfg.ground_truths.empty() && cfg.ground_truths.size() != cfg.targets.size())
        throw UsageError("'gt' must list one map per 'target'");
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open config " + file.string());
    try {
        return parse_experiment_config(in, file.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.message(), file.string());
    }
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces

/// A unit-area mesh with the operators every experiment needs.
struct PreparedShape {
    TriangleMesh mesh;
    double original_area = 0.0;
    LaplacianPair lap;
    std::shared_ptr<const GeodesicOracle> geodesics;

    Index size() const noexcept { return mesh.n_vertices(); }
};

inline PreparedShape prepare_shape(const TriangleMesh& raw) {
    PreparedShape shape;
    auto [mesh, area] = normalize_unit_area(raw);
    shape.mesh = std::move(mesh);
    shape.original_area = area;
    shape.lap = build_laplacian(shape.mesh);
    shape.geodesics = std::make_shared<GeodesicOracle>(shape.mesh);
    return shape;
}

inline PreparedShape prepare_shape(const std::filesystem::path& path) { return prepare_shape(load_mesh(path)); }

/// Diffusion-scale ratios for a pair: the larger shape (by original area)
/// gets rho = sqrt(area_small / area_large), the smaller one keeps 1.
inline std::pair<double, double> pair_rhos(double area_src, double area_dst,
                                           std::optional<double> explicit_rho = std::nullopt) {
    const double rho = explicit_rho ? *explicit_rho : compute_rho(std::min(area_src, area_dst),
                                                                  std::max(area_src, area_dst));
    return area_src >= area_dst ? std::pair{rho, 1.0} : std::pair{1.0, rho};
}

/// Self-match errors of delta reconstruction with a wavelet dictionary.
inline Eigen::VectorXd self_match_errors(const PreparedShape& shape, const SampleSet& samples, Index n_scales,
                                         double t_max) {
    const WaveletDictionary dict = build_dictionary(shape.lap, samples, n_scales, t_max);
    const PointMap map = reconstruct_delta_map(dict, build_gamma(samples.size(), n_scales));
    return geodesic_errors(map, PointMap::identity(shape.size()), shape.mesh, shape.geodesics.get());
}

/// Runs `jobs` on up to `workers` threads, returning results in job order.
template <typename Result>
std::vector<Result> run_pool(std::vector<std::function<Result()>> jobs, Index workers) {
    const std::size_t n_workers = std::max<std::size_t>(
        1, workers > 0 ? static_cast<std::size_t>(workers) : std::thread::hardware_concurrency());
    std::vector<std::optional<Result>> results(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                results[i] = jobs[i]();
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < std::min(n_workers, jobs.size()); ++w) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    std::vector<Result> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

// ---------------------------------------------------------------------------
// Report writing

/// Ordered key=value summary.
class Summary {
public:
    template <typename T>
    void set(const std::string& key, const T& value) {
        std::ostringstream ss;
        ss << std::setprecision(10) << value;
        entries_.emplace_back(key, ss.str());
    }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
        return out;
    }

    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return v;
        return std::nullopt;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct ExperimentReport {
    Summary summary;
    std::vector<std::filesystem::path> files;
};

namespace detail {

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::string& schema, const std::string& header)
        : out_(path), path_(path) {
        if (!out_) throw DataError("cannot write " + path.string());
        out_ << schema << '\n' << header << '\n' << std::setprecision(17);
    }

    template <typename... Cols>
    void row(const Cols&... cols) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cols), ...);
        out_ << '\n';
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

inline void append_curve(CsvFile& csv, const std::string& label, const EvalCurve& c) {
    for (std::size_t i = 0; i < c.thresholds.size(); ++i) csv.row(label, c.thresholds[i], c.fractions[i]);
}

}  // namespace detail

inline constexpr const char* kSweepSchema = "#schema=diffwave.sweep.v1";
inline constexpr const char* kTimingSchema = "#schema=diffwave.timing.v1";

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

struct PairJob {
    PreparedShape source;
    PreparedShape target;
    PointMap gt;
};

inline PointMap load_gt_or_identity(const ExperimentConfig& cfg, std::size_t k, const PreparedShape& src,
                                    const PreparedShape& dst) {
    if (k < cfg.ground_truths.size()) {
        PointMap gt = load_pointmap(cfg.ground_truths[k], dst.size());
        if (gt.source_size() != src.size())
            throw DataError("ground-truth map " + cfg.ground_truths[k].string() + " has " +
                            std::to_string(gt.source_size()) + " entries for " + std::to_string(src.size()) +
                            " source vertices");
        return gt;
    }
    if (src.size() != dst.size()) throw UsageError("pair experiments need 'gt' when vertex counts differ");
    warn("no ground-truth map given; assuming identity correspondence");
    return PointMap::identity(src.size());
}

/// Landmarks on both shapes: from files when given, otherwise sampled on the
/// source and carried over by the ground truth.
inline std::pair<SampleSet, SampleSet> pair_landmarks(const ExperimentConfig& cfg, const PairJob& job, Index n) {
    if (cfg.landmarks_src && cfg.landmarks_dst) {
        auto src = load_index_list(*cfg.landmarks_src);
        auto dst = load_index_list(*cfg.landmarks_dst);
        if (src.size() != dst.size()) throw DataError("landmark files differ in length");
        if (static_cast<Index>(src.size()) < n) throw DataError("not enough landmarks for the requested count");
        src.resize(static_cast<std::size_t>(n));
        dst.resize(static_cast<std::size_t>(n));
        SampleSet a = SampleSet::given(src), b = SampleSet::given(dst);
        a.validate(job.source.size());
        b.validate(job.target.size());
        return {a, b};
    }
    SampleSet a = sample(job.source.mesh, n, cfg.strategy, cfg.seed, job.source.geodesics.get());
    SampleSet b = a;
    for (auto& s : b.indices) s = job.gt.targets[static_cast<std::size_t>(s)];
    b.strategy = SamplingStrategy::given;
    b.validate(job.target.size());
    return {a, b};
}

struct PairScores {
    EvalCurve curve;
    Eigen::VectorXd errors;
};

inline PairScores score(const ExperimentConfig& cfg, const PairJob& job, const PointMap& map) {
    PairScores s;
    s.errors = geodesic_errors(map, job.gt, job.target.mesh, job.target.geodesics.get());
    s.curve = curve(s.errors, cfg.n_thresholds, cfg.max_threshold);
    return s;
}

template <typename Dict, typename Build>
PointMap transfer_with(const PairJob& job, const SampleSet& src, const SampleSet& dst, Build&& build) {
    const auto [rho_src, rho_dst] = pair_rhos(job.source.original_area, job.target.original_area);
    const Dict a = build(job.source.lap, src, rho_src);
    const Dict b = build(job.target.lap, dst, rho_dst);
    return transfer_pointmap(a, b);
}

inline std::vector<PairJob> load_pairs(const ExperimentConfig& cfg) {
    const PreparedShape source = prepare_shape(cfg.mesh);
    std::vector<PairJob> jobs;
    if (cfg.targets.empty()) {
        jobs.push_back(PairJob{source, source, PointMap::identity(source.size())});
        return jobs;
    }
    for (std::size_t k = 0; k < cfg.targets.size(); ++k) {
        PreparedShape target = prepare_shape(cfg.targets[k]);
        PointMap gt = load_gt_or_identity(cfg, k, source, target);
        jobs.push_back(PairJob{source, std::move(target), std::move(gt)});
    }
    return jobs;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline ExperimentReport run_self_match(const ExperimentConfig& cfg) {
    const PreparedShape shape = prepare_shape(cfg.mesh);
    ExperimentReport report;
    CsvFile curves(cfg.out_dir / "curves.csv", kCurveSchema, "label,threshold,fraction");
    std::optional<Spectrum> spectrum;
    if (shape.size() <= cfg.eig_cap) {
        const Index needed = std::min(shape.size(), *std::max_element(cfg.samples.begin(), cfg.samples.end()) + 1);
        spectrum = generalized_eigs(shape.lap, {needed, cfg.eig_cap});
    } else {
        warn("mesh exceeds eig_cap; eigenbasis baseline skipped");
    }
    for (Index n_scales : cfg.scales)
        for (double t_max : cfg.tmax)
            for (Index n : cfg.samples) {
                const SampleSet samples = sample(shape.mesh, n, cfg.strategy, cfg.seed, shape.geodesics.get());
                const EvalCurve ours = curve(self_match_errors(shape, samples, n_scales, t_max), cfg.n_thresholds,
                                             cfg.max_threshold);
                const std::string tag = "S" + std::to_string(n) + "_K" + std::to_string(n_scales) + "_T" +
                                        [&] { std::ostringstream s; s << t_max; return s.str(); }();
                append_curve(curves, "wavelet_" + tag, ours);
                report.summary.set("wavelet_" + tag + ".mean_error", ours.mean_error);
                report.summary.set("wavelet_" + tag + ".auc_025", ours.auc_025);
                if (spectrum) {
                    const PointMap lbob = spectral_delta_map(*spectrum, shape.lap.mass, std::min(n + 1, shape.size()));
                    const EvalCurve base = curve(geodesic_errors(lbob, PointMap::identity(shape.size()), shape.mesh,
                                                                 shape.geodesics.get()),
                                                 cfg.n_thresholds, cfg.max_threshold);
                    append_curve(curves, "lbob_" + tag, base);
                    report.summary.set("lbob_" + tag + ".mean_error", base.mean_error);
                    report.summary.set("lbob_" + tag + ".auc_025", base.auc_025);
                }
            }
    report.files.push_back(curves.path());
    return report;
}

inline ExperimentReport run_pair_match(const ExperimentConfig& cfg) {
    const std::vector<PairJob> jobs = load_pairs(cfg);
    struct Row {
        std::string label;
        EvalCurve curve;
    };
    std::vector<std::function<std::vector<Row>()>> tasks;
    for (std::size_t p = 0; p < jobs.size(); ++p) {
        tasks.emplace_back([&cfg, &job = jobs[p], p] {
            std::vector<Row> rows;
            std::optional<Spectrum> spec_src, spec_dst;
            const Index max_n = *std::max_element(cfg.samples.begin(), cfg.samples.end());
            if (job.source.size() <= cfg.eig_cap && job.target.size() <= cfg.eig_cap) {
                spec_src = generalized_eigs(job.source.lap, {std::min(max_n + 1, job.source.size()), cfg.eig_cap});
                spec_dst = generalized_eigs(job.target.lap, {std::min(max_n + 1, job.target.size()), cfg.eig_cap});
            }
            for (Index n_scales : cfg.scales)
                for (double t_max : cfg.tmax)
                    for (Index n : cfg.samples) {
                        const auto [src, dst] = pair_landmarks(cfg, job, n);
                        std::ostringstream tag;
                        tag << "P" << p << "_S" << n << "_K" << n_scales << "_T" << t_max;
                        const auto wave = transfer_with<WaveletDictionary>(
                            job, src, dst, [&](const LaplacianPair& lap, const SampleSet& s, double rho) {
                                return build_dictionary(lap, s, n_scales, t_max, rho);
                            });
                        rows.push_back({"wavelet_" + tag.str(), score(cfg, job, wave).curve});
                        const auto heat = transfer_with<HeatDictionary>(
                            job, src, dst, [&](const LaplacianPair& lap, const SampleSet& s, double rho) {
                                return build_heat_dictionary(lap, s, n_scales, t_max, rho);
                            });
                        rows.push_back({"heat_" + tag.str(), score(cfg, job, heat).curve});
                        if (spec_src) {
                            const Index k = std::min({n + 1, spec_src->count(), spec_dst->count()});
                            const FunctionalMap c = gt_functional_map(*spec_src, *spec_dst, job.target.lap.mass, job.gt, k);
                            rows.push_back({"lbob_" + tag.str(), score(cfg, job, fmap_to_pointmap(c, *spec_src, *spec_dst)).curve});
                        }
                    }
            return rows;
        });
    }
    const auto results = run_pool(std::move(tasks), cfg.workers);

    ExperimentReport report;
    CsvFile curves(cfg.out_dir / "curves.csv", kCurveSchema, "label,threshold,fraction");
    std::map<std::string, std::vector<double>> mean_by_method, auc_by_method;
    for (const auto& rows : results)
        for (const auto& row : rows) {
            append_curve(curves, row.label, row.curve);
            report.summary.set(row.label + ".mean_error", row.curve.mean_error);
            report.summary.set(row.label + ".auc_025", row.curve.auc_025);
            // Aggregate over pairs: drop the "_P<k>" component.
            const auto p = row.label.find("_P");
            const auto rest = row.label.find('_', p + 2);
            const std::string key = row.label.substr(0, p) + row.label.substr(rest);
            mean_by_method[key].push_back(row.curve.mean_error);
            auc_by_method[key].push_back(row.curve.auc_025);
        }
    for (const auto& [key, v] : mean_by_method) {
        report.summary.set("avg_" + key + ".mean_error", mean_of(v));
        report.summary.set("avg_" + key + ".auc_025", mean_of(auc_by_method[key]));
    }
    report.files.push_back(curves.path());
    return report;
}

inline ExperimentReport run_sampling(const ExperimentConfig& cfg) {
    const PreparedShape shape = prepare_shape(cfg.mesh);
    ExperimentReport report;
    CsvFile csv(cfg.out_dir / "sampling.csv", kSweepSchema, "strategy,samples,scales,tmax,mean_error,auc_025");
    for (SamplingStrategy strategy : cfg.strategies)
        for (Index n : cfg.samples) {
            const SampleSet samples = sample(shape.mesh, n, strategy, cfg.seed, shape.geodesics.get());
            const EvalCurve c = curve(self_match_errors(shape, samples, cfg.scales.front(), cfg.tmax.front()),
                                      cfg.n_thresholds, cfg.max_threshold);
            csv.row(to_string(strategy), n, cfg.scales.front(), cfg.tmax.front(), c.mean_error, c.auc_025);
            report.summary.set(std::string(to_string(strategy)) + "_S" + std::to_string(n) + ".mean_error",
                               c.mean_error);
        }
    report.files.push_back(csv.path());
    return report;
}

inline ExperimentReport run_noise(const ExperimentConfig& cfg) {
    const std::vector<PairJob> jobs = load_pairs(cfg);
    const Index n = cfg.samples.front();
    const double t_max = cfg.tmax.front();
    ExperimentReport report;
    CsvFile csv(cfg.out_dir / "noise.csv", kSweepSchema, "pair,method,scales,displaced,noise_radius,mean_error,auc_025");
    report.summary.set("noise_radius_reference", "eccentricity of each displaced target sample (graph geodesic)");
    for (std::size_t p = 0; p < jobs.size(); ++p) {
        const PairJob& job = jobs[p];
        const auto [src, dst] = pair_landmarks(cfg, job, n);
        const auto [rho_src, rho_dst] = pair_rhos(job.source.original_area, job.target.original_area);
        std::optional<Spectrum> spec_src, spec_dst;
        if (job.source.size() <= cfg.eig_cap && job.target.size() <= cfg.eig_cap) {
            spec_src = generalized_eigs(job.source.lap, {std::min(cfg.truncation, job.source.size()), cfg.eig_cap});
            spec_dst = generalized_eigs(job.target.lap, {std::min(cfg.truncation, job.target.size()), cfg.eig_cap});
        }
        for (Index displaced : cfg.noise_counts) {
            if (displaced > n) continue;
            for (double radius : cfg.noise_radii) {
                const SampleSet noisy =
                    perturb_samples(job.target.mesh, dst, radius, displaced, cfg.seed + 1, job.target.geodesics.get());
                for (Index n_scales : cfg.scales) {
                    const WaveletDictionary a = build_dictionary(job.source.lap, src, n_scales, t_max, rho_src);
                    const WaveletDictionary b = build_dictionary(job.target.lap, noisy, n_scales, t_max, rho_dst);
                    const EvalCurve c = score(cfg, job, transfer_pointmap(a, b)).curve;
                    csv.row(p, "wavelet", n_scales, displaced, radius, c.mean_error, c.auc_025);
                }
                // Baselines at the first configured scale count.
                const Index base_scales = cfg.scales.front();
                const HeatDictionary ha = build_heat_dictionary(job.source.lap, src, base_scales, t_max, rho_src);
                const HeatDictionary hb = build_heat_dictionary(job.target.lap, noisy, base_scales, t_max, rho_dst);
                const EvalCurve hc = score(cfg, job, transfer_pointmap(ha, hb)).curve;
                csv.row(p, "heat", base_scales, displaced, radius, hc.mean_error, hc.auc_025);
                if (spec_src) {
                    const auto times = reference_times(diffusion_step_size(t_max, base_scales, 1.0, 1.0), base_scales,
                                                       ReferenceTimes::linear_nt);
                    const auto qa = spectral_wavelet_dictionary(*spec_src, job.source.lap.mass, times, src,
                                                                std::min(cfg.truncation, spec_src->count()));
                    const auto qb = spectral_wavelet_dictionary(*spec_dst, job.target.lap.mass, times, noisy,
                                                                std::min(cfg.truncation, spec_dst->count()));
                    const EvalCurve qc = score(cfg, job, nearest_rows(qa.columns, qb.columns)).curve;
                    csv.row(p, "spectral", base_scales, displaced, radius, qc.mean_error, qc.auc_025);
                }
            }
        }
    }
    report.files.push_back(csv.path());
    return report;
}

inline ExperimentReport run_tmax_sweep(const ExperimentConfig& cfg) {
    const std::vector<PairJob> jobs = load_pairs(cfg);
    const Index n = cfg.samples.front();
    const Index n_scales = cfg.scales.front();
    ExperimentReport report;
    CsvFile csv(cfg.out_dir / "tmax.csv", kSweepSchema, "method,tmax,mean_error,auc_025");
    for (double t_max : cfg.tmax) {
        std::vector<double> wave_err, wave_auc, heat_err, heat_auc;
        for (const PairJob& job : jobs) {
            const auto [src, dst] = pair_landmarks(cfg, job, n);
            const auto wave = transfer_with<WaveletDictionary>(
                job, src, dst, [&](const LaplacianPair& lap, const SampleSet& s, double rho) {
                    return build_dictionary(lap, s, n_scales, t_max, rho);
                });
            const auto heat = transfer_with<HeatDictionary>(
                job, src, dst, [&](const LaplacianPair& lap, const SampleSet& s, double rho) {
                    return build_heat_dictionary(lap, s, n_scales, t_max, rho);
                });
            const EvalCurve cw = score(cfg, job, wave).curve, ch = score(cfg, job, heat).curve;
            wave_err.push_back(cw.mean_error);
            wave_auc.push_back(cw.auc_025);
            heat_err.push_back(ch.mean_error);
            heat_auc.push_back(ch.auc_025);
        }
        csv.row("wavelet", t_max, mean_of(wave_err), mean_of(wave_auc));
        csv.row("heat", t_max, mean_of(heat_err), mean_of(heat_auc));
    }
    report.files.push_back(csv.path());
    return report;
}

}  // namespace detail

/// Result of comparing the three wavelet constructions against the
/// full-spectrum reference on one mesh.
struct WaveletComparison {
    ReferenceDictionary reference;
    DictionaryErrors ours;
    DictionaryErrors truncated;
    DictionaryErrors heat;
    double ours_seconds = 0.0;
    double truncated_seconds = 0.0;  // eigenpairs + evaluation
    double heat_seconds = 0.0;
    Index truncation = 0;
};

/// Scores the Euler dictionary, the truncated spectral wavelets and the heat
/// dictionary (as built, L1-normalized) against full-spectrum Mexican hats at
/// the reference times.
inline WaveletComparison compare_wavelets(const LaplacianPair& lap, const SampleSet& samples, Index n_scales,
                                          double t_max, ReferenceTimes mode, Index truncation, Index eig_cap) {
    using clock = std::chrono::steady_clock;
    const auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    WaveletComparison out;
    const Spectrum full = generalized_eigs(lap, {std::nullopt, eig_cap});
    const double t_step = diffusion_step_size(t_max, n_scales, 1.0, lap.total_area);
    out.reference = ground_truth_wavelets(full, lap.mass, t_step, n_scales, samples, mode);
    if (out.reference.valid_scales() == 0)
        warn("no reference scale has a positive time; all errors are undefined");

    auto t0 = clock::now();
    const WaveletDictionary ours = build_dictionary(lap, samples, n_scales, t_max);
    auto t1 = clock::now();
    out.ours_seconds = seconds(t0, t1);
    out.ours = dictionary_error(ours.columns, out.reference, lap.mass);

    out.truncation = std::min(truncation, lap.size());
    t0 = clock::now();
    const Spectrum partial = generalized_eigs(lap, {out.truncation, eig_cap});
    const ReferenceDictionary truncated =
        spectral_wavelet_dictionary(partial, lap.mass, out.reference.times, samples, out.truncation);
    t1 = clock::now();
    out.truncated_seconds = seconds(t0, t1);
    out.truncated = dictionary_error(truncated.columns, out.reference, lap.mass);

    t0 = clock::now();
    const HeatDictionary heat = build_heat_dictionary(lap, samples, n_scales, t_max);
    t1 = clock::now();
    out.heat_seconds = seconds(t0, t1);
    out.heat = dictionary_error(heat.columns, out.reference, lap.mass);
    return out;
}

/// Writes per-scale L2 / L-infinity errors for the three constructions.
inline void write_scale_errors_csv(const std::filesystem::path& path, const WaveletComparison& cmp) {
    detail::CsvFile csv(path, kScaleErrorSchema, "method,scale,time,valid,l2,linf");
    const std::pair<const char*, const DictionaryErrors*> rows[] = {
        {"ours", &cmp.ours}, {"spectral_truncated", &cmp.truncated}, {"heat", &cmp.heat}};
    for (const auto& [name, err] : rows)
        for (Index n = 0; n < cmp.reference.n_scales; ++n) {
            const auto i = static_cast<std::size_t>(n);
            csv.row(name, n + 1, cmp.reference.times[i], cmp.reference.valid[i] ? 1 : 0, err->l2_per_scale[i],
                    err->linf_per_scale[i]);
        }
}

struct TimingResult {
    double dictionary_seconds = 0.0;
    double spectral_seconds = 0.0;
    double speedup = 0.0;
};

/// Wall time of the Euler dictionary versus `truncation` eigenpairs plus
/// spectral wavelet evaluation, for the same samples and scales.
inline TimingResult time_dictionary_vs_spectral(const LaplacianPair& lap, const SampleSet& samples, Index n_scales,
                                                double t_max, Index truncation, Index eig_cap) {
    using clock = std::chrono::steady_clock;
    TimingResult r;
    auto t0 = clock::now();
    const WaveletDictionary dict = build_dictionary(lap, samples, n_scales, t_max);
    auto t1 = clock::now();
    r.dictionary_seconds = std::chrono::duration<double>(t1 - t0).count();

    t0 = clock::now();
    const Index k = std::min(truncation, lap.size());
    const Spectrum spec = generalized_eigs(lap, {k, eig_cap});
    const auto times = reference_times(dict.t_step, n_scales, ReferenceTimes::linear_nt);
    const ReferenceDictionary spectral = spectral_wavelet_dictionary(spec, lap.mass, times, samples, k);
    t1 = clock::now();
    r.spectral_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.speedup = r.spectral_seconds / r.dictionary_seconds;
    return r;
}

/// Runs one configured experiment, writes CSV files plus `summary.txt` into
/// `out_dir`, and returns the report.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    if (!std::filesystem::exists(cfg.mesh)) throw DataError("mesh file not found: " + cfg.mesh.string());
    for (const auto& t : cfg.targets)
        if (!std::filesystem::exists(t)) throw DataError("target mesh not found: " + t.string());
    std::filesystem::create_directories(cfg.out_dir);

    ExperimentReport report;
    switch (cfg.kind) {
        case ExperimentKind::self_match: report = detail::run_self_match(cfg); break;
        case ExperimentKind::pair_match: report = detail::run_pair_match(cfg); break;
        case ExperimentKind::sampling: report = detail::run_sampling(cfg); break;
        case ExperimentKind::noise: report = detail::run_noise(cfg); break;
        case ExperimentKind::tmax_sweep: report = detail::run_tmax_sweep(cfg); break;
        case ExperimentKind::wavelet_compare: {
            const PreparedShape shape = prepare_shape(cfg.mesh);
            const SampleSet samples =
                sample(shape.mesh, cfg.samples.front(), cfg.strategy, cfg.seed, shape.geodesics.get());
            const WaveletComparison cmp = compare_wavelets(shape.lap, samples, cfg.scales.front(), cfg.tmax.front(),
                                                           cfg.reference, cfg.truncation, cfg.eig_cap);
            write_scale_errors_csv(cfg.out_dir / "scale_errors.csv", cmp);
            report.files.push_back(cfg.out_dir / "scale_errors.csv");
            report.summary.set("valid_scales", cmp.reference.valid_scales());
            report.summary.set("ours.l2_average", cmp.ours.l2_average);
            report.summary.set("ours.linf_average", cmp.ours.linf_average);
            report.summary.set("spectral_truncated.l2_average", cmp.truncated.l2_average);
            report.summary.set("spectral_truncated.linf_average", cmp.truncated.linf_average);
            report.summary.set("heat.l2_average", cmp.heat.l2_average);
            report.summary.set("heat.linf_average", cmp.heat.linf_average);
            report.summary.set("ours.seconds", cmp.ours_seconds);
            report.summary.set("spectral_truncated.seconds", cmp.truncated_seconds);
            report.summary.set("heat.seconds", cmp.heat_seconds);
            break;
        }
        case ExperimentKind::timing: {
            const PreparedShape shape = prepare_shape(cfg.mesh);
            const SampleSet samples =
                sample(shape.mesh, cfg.samples.front(), cfg.strategy, cfg.seed, shape.geodesics.get());
            const TimingResult r = time_dictionary_vs_spectral(shape.lap, samples, cfg.scales.front(),
                                                               cfg.tmax.front(), cfg.truncation, cfg.eig_cap);
            detail::CsvFile csv(cfg.out_dir / "timing.csv", kTimingSchema,
                                "n_vertices,samples,scales,dictionary_seconds,spectral_seconds,speedup");
            csv.row(shape.size(), samples.size(), cfg.scales.front(), r.dictionary_seconds, r.spectral_seconds,
                    r.speedup);
            report.files.push_back(csv.path());
            report.summary.set("n_vertices", shape.size());
            report.summary.set("dictionary_seconds", r.dictionary_seconds);
            report.summary.set("spectral_seconds", r.spectral_seconds);
            report.summary.set("speedup", r.speedup);
            break;
        }
    }
    const auto summary_path = cfg.out_dir / "summary.txt";
    std::ofstream out(summary_path);
    if (!out) throw DataError("cannot write " + summary_path.string());
    out << report.summary.str();
    report.files.push_back(summary_path);
    return report;
}

}  // namespace diffwave
