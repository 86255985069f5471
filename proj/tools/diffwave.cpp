// Command-line front end for the diffwave library.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "diffwave/diffwave.hpp"

namespace fs = std::filesystem;
using namespace diffwave;

namespace {

struct DictArgs {
    std::string mesh;
    std::string samples = "10";
    Index scales = 25;
    double tmax = 1.0;
    std::string rho = "1";
    std::string partner;
    std::string strategy = "fps-euclidean";
    std::uint64_t seed = 0;
    std::string kind = "wavelet";
    std::string out;
};

struct MatchSelfArgs {
    std::string mesh;
    Index samples = 6;
    Index scales = 25;
    double tmax = 1.0;
    std::string strategy = "fps-euclidean";
    std::uint64_t seed = 0;
    std::string out;
};

struct MatchPairArgs {
    std::string src, dst, landmarks_src, landmarks_dst, out;
    Index scales = 25;
    double tmax = 1.0;
    std::string rho = "auto";
    std::string method = "wavelet";
};

struct EvalArgs {
    std::string map, gt, mesh, out, label;
    Index n_thresholds = 100;
    double max_threshold = 0.5;
};

struct CompareArgs {
    std::string mesh, out;
    Index samples = 6;
    Index scales = 25;
    double tmax = 1.0;
    std::string reference = "linear";
    Index truncation = kDefaultTruncation;
    Index eig_cap = 5000;
    std::string strategy = "fps-euclidean";
    std::uint64_t seed = 0;
};

struct IcosphereArgs {
    int level = 3;
    double jitter = 0.0;
    double deform = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

std::optional<Index> parse_count(const std::string& s) {
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

double parse_rho_value(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("--rho expects a number or 'auto', got '" + s + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

int run_dict_build(const DictArgs& a) {
    const PreparedShape shape = prepare_shape(fs::path(a.mesh));
    SampleSet samples;
    if (const auto n = parse_count(a.samples)) {
        samples = sample(shape.mesh, *n, parse_sampling_strategy(a.strategy), a.seed, shape.geodesics.get());
    } else {
        samples = SampleSet::given(load_index_list(a.samples));
        samples.validate(shape.size());
    }

    double rho = 1.0;
    if (a.rho == "auto") {
        if (!a.partner.empty()) {
            const double partner_area = load_mesh(fs::path(a.partner)).total_area();
            rho = pair_rhos(shape.original_area, partner_area).first;
        }
    } else {
        rho = parse_rho_value(a.rho);
    }

    if (a.kind == "wavelet") {
        save_dictionary(a.out, build_dictionary(shape.lap, samples, a.scales, a.tmax, rho), "wavelet");
    } else if (a.kind == "heat") {
        save_dictionary(a.out, build_heat_dictionary(shape.lap, samples, a.scales, a.tmax, rho), "heat");
    } else {
        throw UsageError("--kind must be 'wavelet' or 'heat'");
    }
    std::cout << "wrote " << a.out << " (" << shape.size() << " vertices, " << samples.size() * a.scales
              << " columns, rho=" << rho << ")\n";
    return 0;
}

int run_match_self(const MatchSelfArgs& a) {
    const PreparedShape shape = prepare_shape(fs::path(a.mesh));
    const SampleSet samples =
        sample(shape.mesh, a.samples, parse_sampling_strategy(a.strategy), a.seed, shape.geodesics.get());
    const WaveletDictionary dict = build_dictionary(shape.lap, samples, a.scales, a.tmax);
    const PointMap map = reconstruct_delta_map(dict, build_gamma(samples.size(), a.scales));
    save_pointmap(a.out, map);
    const EvalCurve c = curve(geodesic_errors(map, PointMap::identity(shape.size()), shape.mesh, shape.geodesics.get()));
    std::cout << std::setprecision(10) << "mean_error=" << c.mean_error << "\nauc_025=" << c.auc_025 << '\n';
    return 0;
}

int run_match_pair(const MatchPairArgs& a) {
    const PreparedShape src = prepare_shape(fs::path(a.src));
    const PreparedShape dst = prepare_shape(fs::path(a.dst));
    const auto ls = load_index_list(a.landmarks_src);
    const auto ld = load_index_list(a.landmarks_dst);
    if (ls.size() != ld.size())
        throw DataError("landmark files list " + std::to_string(ls.size()) + " and " + std::to_string(ld.size()) +
                        " vertices");
    const SampleSet s_src = SampleSet::given(ls), s_dst = SampleSet::given(ld);
    s_src.validate(src.size());
    s_dst.validate(dst.size());

    std::optional<double> explicit_rho;
    if (a.rho != "auto") explicit_rho = parse_rho_value(a.rho);
    const auto [rho_src, rho_dst] = pair_rhos(src.original_area, dst.original_area, explicit_rho);

    PointMap map;
    if (a.method == "wavelet") {
        map = transfer_pointmap(build_dictionary(src.lap, s_src, a.scales, a.tmax, rho_src),
                                build_dictionary(dst.lap, s_dst, a.scales, a.tmax, rho_dst));
    } else if (a.method == "heat") {
        map = transfer_pointmap(build_heat_dictionary(src.lap, s_src, a.scales, a.tmax, rho_src),
                                build_heat_dictionary(dst.lap, s_dst, a.scales, a.tmax, rho_dst));
    } else {
        throw UsageError("--method must be 'wavelet' or 'heat'");
    }
    save_pointmap(a.out, map);
    std::cout << "wrote " << a.out << " (" << map.source_size() << " entries, rho_src=" << rho_src
              << ", rho_dst=" << rho_dst << ")\n";
    return 0;
}

int run_eval(const EvalArgs& a) {
    const auto [mesh, area] = normalize_unit_area(load_mesh(fs::path(a.mesh)));
    const PointMap map = load_pointmap(a.map, mesh.n_vertices());
    const PointMap gt = load_pointmap(a.gt, mesh.n_vertices());
    const EvalCurve c = curve(geodesic_errors(map, gt, mesh), a.n_thresholds, a.max_threshold);
    auto out = open_out(a.out);
    write_curve_csv(out, c, a.label);
    std::cout << std::setprecision(10) << "mean_error=" << c.mean_error << "\nauc_025=" << c.auc_025 << '\n';
    return 0;
}

int run_compare(const CompareArgs& a) {
    ReferenceTimes mode;
    if (a.reference == "linear") mode = ReferenceTimes::linear_nt;
    else if (a.reference == "log") mode = ReferenceTimes::log_nt;
    else throw UsageError("--reference must be 'linear' or 'log'");

    const PreparedShape shape = prepare_shape(fs::path(a.mesh));
    const SampleSet samples =
        sample(shape.mesh, a.samples, parse_sampling_strategy(a.strategy), a.seed, shape.geodesics.get());
    const WaveletComparison cmp =
        compare_wavelets(shape.lap, samples, a.scales, a.tmax, mode, a.truncation, a.eig_cap);
    write_scale_errors_csv(a.out, cmp);
    std::cout << std::setprecision(6) << "valid_scales=" << cmp.reference.valid_scales() << '\n'
              << "ours.l2_average=" << cmp.ours.l2_average << "\nours.linf_average=" << cmp.ours.linf_average
              << "\nours.seconds=" << cmp.ours_seconds << '\n'
              << "spectral_truncated.l2_average=" << cmp.truncated.l2_average
              << "\nspectral_truncated.linf_average=" << cmp.truncated.linf_average
              << "\nspectral_truncated.seconds=" << cmp.truncated_seconds << '\n'
              << "heat.l2_average=" << cmp.heat.l2_average << "\nheat.linf_average=" << cmp.heat.linf_average
              << "\nheat.seconds=" << cmp.heat_seconds << '\n';
    return 0;
}

int run_icosphere(const IcosphereArgs& a) {
    if (a.level < 0 || a.level > 7) throw UsageError("--level must lie in [0, 7]");
    TriangleMesh mesh = shapes::icosphere(a.level);
    if (a.jitter > 0.0) mesh = shapes::jitter(mesh, a.jitter, a.seed);
    if (a.deform != 0.0) mesh = shapes::smooth_deform(mesh, a.deform);
    save_mesh(a.out, mesh);
    std::cout << "wrote " << a.out << " (" << mesh.n_vertices() << " vertices)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusion wavelet dictionaries on triangle meshes"};
    app.require_subcommand(1);

    DictArgs dict_args;
    auto* dict = app.add_subcommand("dict", "Dictionary construction");
    dict->require_subcommand(1);
    auto* dict_build = dict->add_subcommand("build", "Build a wavelet or heat dictionary");
    dict_build->add_option("--mesh", dict_args.mesh, "Mesh file (.off or .obj)")->required()->check(CLI::ExistingFile);
    dict_build->add_option("--samples", dict_args.samples, "Sample count or index file")->capture_default_str();
    dict_build->add_option("--scales", dict_args.scales)->capture_default_str()->check(CLI::PositiveNumber);
    dict_build->add_option("--tmax", dict_args.tmax)->capture_default_str()->check(CLI::PositiveNumber);
    dict_build->add_option("--rho", dict_args.rho, "Scale ratio in (0,1] or 'auto'")->capture_default_str();
    dict_build->add_option("--partner", dict_args.partner, "Other shape of the pair, used by --rho auto")
        ->check(CLI::ExistingFile);
    dict_build->add_option("--strategy", dict_args.strategy)->capture_default_str();
    dict_build->add_option("--seed", dict_args.seed)->capture_default_str();
    dict_build->add_option("--kind", dict_args.kind, "wavelet or heat")->capture_default_str();
    dict_build->add_option("--out", dict_args.out)->required();

    auto* match = app.add_subcommand("match", "Point-to-point matching");
    match->require_subcommand(1);
    MatchSelfArgs self_args;
    auto* match_self = match->add_subcommand("self", "Self-match by delta reconstruction");
    match_self->add_option("--mesh", self_args.mesh)->required()->check(CLI::ExistingFile);
    match_self->add_option("--samples", self_args.samples)->capture_default_str()->check(CLI::PositiveNumber);
    match_self->add_option("--scales", self_args.scales)->capture_default_str()->check(CLI::PositiveNumber);
    match_self->add_option("--tmax", self_args.tmax)->capture_default_str()->check(CLI::PositiveNumber);
    match_self->add_option("--strategy", self_args.strategy)->capture_default_str();
    match_self->add_option("--seed", self_args.seed)->capture_default_str();
    match_self->add_option("--out", self_args.out)->required();

    MatchPairArgs pair_args;
    auto* match_pair = match->add_subcommand("pair", "Transfer a map between two shapes");
    match_pair->add_option("--src", pair_args.src)->required()->check(CLI::ExistingFile);
    match_pair->add_option("--dst", pair_args.dst)->required()->check(CLI::ExistingFile);
    match_pair->add_option("--landmarks-src", pair_args.landmarks_src)->required()->check(CLI::ExistingFile);
    match_pair->add_option("--landmarks-dst", pair_args.landmarks_dst)->required()->check(CLI::ExistingFile);
    match_pair->add_option("--scales", pair_args.scales)->capture_default_str()->check(CLI::PositiveNumber);
    match_pair->add_option("--tmax", pair_args.tmax)->capture_default_str()->check(CLI::PositiveNumber);
    match_pair->add_option("--rho", pair_args.rho)->capture_default_str();
    match_pair->add_option("--method", pair_args.method, "wavelet or heat")->capture_default_str();
    match_pair->add_option("--out", pair_args.out)->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Geodesic error curve of a map");
    eval->add_option("--map", eval_args.map)->required()->check(CLI::ExistingFile);
    eval->add_option("--gt", eval_args.gt)->required()->check(CLI::ExistingFile);
    eval->add_option("--mesh", eval_args.mesh, "Target mesh")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", eval_args.out)->required();
    eval->add_option("--label", eval_args.label);
    eval->add_option("--n-thresholds", eval_args.n_thresholds)->capture_default_str();
    eval->add_option("--max-threshold", eval_args.max_threshold)->capture_default_str();

    auto* compare = app.add_subcommand("compare", "Dictionary comparisons");
    compare->require_subcommand(1);
    CompareArgs cmp_args;
    auto* compare_wavelets_cmd = compare->add_subcommand("wavelets", "Errors against full-spectrum wavelets");
    compare_wavelets_cmd->add_option("--mesh", cmp_args.mesh)->required()->check(CLI::ExistingFile);
    compare_wavelets_cmd->add_option("--samples", cmp_args.samples)->capture_default_str()->check(CLI::PositiveNumber);
    compare_wavelets_cmd->add_option("--scales", cmp_args.scales)->capture_default_str()->check(CLI::PositiveNumber);
    compare_wavelets_cmd->add_option("--tmax", cmp_args.tmax)->capture_default_str()->check(CLI::PositiveNumber);
    compare_wavelets_cmd->add_option("--reference", cmp_args.reference, "linear (t = n t_step) or log")
        ->capture_default_str();
    compare_wavelets_cmd->add_option("--truncation", cmp_args.truncation)->capture_default_str();
    compare_wavelets_cmd->add_option("--eig-cap", cmp_args.eig_cap)->capture_default_str();
    compare_wavelets_cmd->add_option("--strategy", cmp_args.strategy)->capture_default_str();
    compare_wavelets_cmd->add_option("--seed", cmp_args.seed)->capture_default_str();
    compare_wavelets_cmd->add_option("--out", cmp_args.out)->required();

    auto* experiment = app.add_subcommand("experiment", "Configured experiments");
    experiment->require_subcommand(1);
    std::string config_path;
    auto* experiment_run = experiment->add_subcommand("run", "Run an experiment from a key=value config");
    experiment_run->add_option("--config", config_path)->required()->check(CLI::ExistingFile);

    auto* mesh_cmd = app.add_subcommand("mesh", "Synthetic meshes");
    mesh_cmd->require_subcommand(1);
    IcosphereArgs ico_args;
    auto* icosphere = mesh_cmd->add_subcommand("icosphere", "Write a subdivided icosahedron");
    icosphere->add_option("--level", ico_args.level)->capture_default_str();
    icosphere->add_option("--jitter", ico_args.jitter, "Vertex noise in mean edge lengths")->capture_default_str();
    icosphere->add_option("--deform", ico_args.deform, "Smooth deformation strength")->capture_default_str();
    icosphere->add_option("--seed", ico_args.seed)->capture_default_str();
    icosphere->add_option("--out", ico_args.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }

    try {
        if (*dict_build) return run_dict_build(dict_args);
        if (*match_self) return run_match_self(self_args);
        if (*match_pair) return run_match_pair(pair_args);
        if (*eval) return run_eval(eval_args);
        if (*compare_wavelets_cmd) return run_compare(cmp_args);
        if (*experiment_run) {
            const ExperimentReport report = run_experiment(load_experiment_config(config_path));
            for (const auto& f : report.files) std::cout << "wrote " << f.string() << '\n';
            return 0;
        }
        if (*icosphere) return run_icosphere(ico_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return static_cast<int>(ErrorKind::numerical);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::data);
    }
    return 0;
}
