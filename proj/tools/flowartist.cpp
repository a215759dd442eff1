// Command-line front end for the flow-aware embedding pipeline.
//
// Subcommands: generate, build-graph, embed, diffuse, eval, plot.
// Option precedence is flags > config file > built-in defaults, and every run
// writes a run.json with the fully resolved configuration, so any output can
// be reproduced from run.json plus the input CSV.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include "flowartist/flowartist.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace flowartist;

namespace {

template <typename T>
void overlay(const Json& section, const char* key, T& target) {
  if (section.contains(key)) target = section.at(key).get<T>();
}

Json section_of(const Json& file, const char* name) {
  return file.contains(name) ? file.at(name) : Json::object();
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  for (const auto& token : split_csv_line(text)) {
    const long v = parse_int(token, 0);
    require(v >= 1, "layer sizes must be positive: " + text);
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& token : split_csv_line(text)) {
    out.push_back(static_cast<int>(parse_int(token, 0)));
  }
  return out;
}

double parse_sigma(const std::string& text) {
  return parse_double(text, 0);
}

void require_file(const std::string& path, const std::string& hint) {
  if (!fs::exists(path)) {
    throw std::invalid_argument("missing file: " + path + (hint.empty() ? "" : " (" + hint + ")"));
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

/// Shared kernel flags and their resolution against a config file section.
struct KernelFlags {
  std::string sigma_text = "auto";
  double beta = 1.0;
  Index sigma_k = 10;
  CLI::App* cmd = nullptr;

  void attach(CLI::App* c) {
    cmd = c;
    cmd->add_option("--sigma", sigma_text,
                    "kernel bandwidth, a number or 'auto' for the median heuristic");
    cmd->add_option("--beta", beta, "flow penalty weight (default 1.0)");
    cmd->add_option("--sigma-k", sigma_k,
                    "neighbor rank used by the median bandwidth heuristic (default 10)");
  }

  KernelParams resolve(const Json& file, const FlowDataset& ds) const {
    KernelParams params;
    bool have_sigma = false;
    const Json sec = section_of(file, "kernel");
    if (sec.contains("sigma")) {
      params.sigma = sec.at("sigma").get<double>();
      have_sigma = true;
    }
    overlay(sec, "beta", params.beta);
    overlay(sec, "epsilon_pos", params.epsilon_pos);
    Index k_for_sigma = sigma_k;
    if (cmd->count("--beta")) params.beta = beta;
    if (cmd->count("--sigma")) {
      if (sigma_text == "auto") {
        have_sigma = false;
      } else {
        params.sigma = parse_sigma(sigma_text);
        have_sigma = true;
      }
    }
    if (!have_sigma) {
      params.sigma = median_heuristic_sigma(ds, std::min<Index>(k_for_sigma, ds.size() - 1));
    }
    params.validate();
    return params;
  }
};

// ---------------------------------------------------------------------------

struct GenerateCmd {
  CLI::App* cmd = nullptr;
  std::string shape_text, out_dir = "out", config_path;
  Index n_points = 500;
  double speed = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::string> params;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("generate", "synthesize a toy velocity dataset");
    cmd->add_option("--shape", shape_text, "circle | branch | spiral | double_helix");
    cmd->add_option("--n", n_points, "number of points (default 500)");
    cmd->add_option("--speed", speed, "velocity magnitude (default 1.0)");
    cmd->add_option("--seed", seed, "generator seed");
    cmd->add_option("--param", params, "shape parameter as name=value, repeatable");
    cmd->add_option("--noise-sigma", noise_sigma, "isotropic position noise std dev");
    cmd->add_option("--noise-seed", noise_seed, "noise seed");
    cmd->add_option("--out", out_dir, "output directory (default out)");
    cmd->add_option("--config", config_path, "JSON config file");
  }

  int run() {
    const Json file = config_path.empty() ? Json::object() : load_json(config_path);
    GeneratorSpec spec;
    NoiseSpec noise;
    const Json gen = section_of(file, "generator");
    if (gen.contains("shape")) spec.shape = shape_from_string(gen.at("shape").get<std::string>());
    overlay(gen, "n_points", spec.n_points);
    overlay(gen, "speed", spec.speed);
    overlay(gen, "seed", spec.seed);
    if (gen.contains("shape_params"))
      spec.shape_params = gen.at("shape_params").get<std::map<std::string, double>>();
    const Json jn = section_of(file, "noise");
    overlay(jn, "sigma", noise.sigma);
    overlay(jn, "seed", noise.seed);
    std::string out = out_dir;
    overlay(file, "out", out);

    if (cmd->count("--shape")) spec.shape = shape_from_string(shape_text);
    else require(gen.contains("shape") || cmd->count("--shape"),
                 "generate: --shape is required (or provide it in --config)");
    if (cmd->count("--n")) spec.n_points = n_points;
    if (cmd->count("--speed")) spec.speed = speed;
    if (cmd->count("--seed")) spec.seed = seed;
    if (cmd->count("--noise-sigma")) noise.sigma = noise_sigma;
    if (cmd->count("--noise-seed")) noise.seed = noise_seed;
    if (cmd->count("--out")) out = out_dir;
    for (const std::string& kv : params) {
      const auto eq = kv.find('=');
      require(eq != std::string::npos && eq > 0, "generate: --param expects name=value, got " + kv);
      spec.shape_params[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1), 0);
    }

    FlowDataset ds = add_noise(generate_dataset(spec), noise);
    ensure_dir(out);
    const std::string csv_path = join(out, "dataset.csv");
    save_dataset_csv(ds, csv_path);

    Json run{{"command", "generate"},
             {"out", out},
             {"generator",
              Json{{"shape", to_string(spec.shape)},
                   {"n_points", spec.n_points},
                   {"speed", spec.speed},
                   {"seed", spec.seed},
                   {"shape_params", spec.shape_params}}},
             {"noise", Json{{"sigma", noise.sigma}, {"seed", noise.seed}}}};
    save_json(run, join(out, "run.json"));
    std::cout << "generate: " << ds.size() << " " << to_string(spec.shape) << " points -> "
              << csv_path << "\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------

struct BuildGraphCmd {
  CLI::App* cmd = nullptr;
  KernelFlags kernel;
  std::string in_path, out_dir = "out", config_path;
  Index k = 10, m = 25;
  int t = 1;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("build-graph",
                             "build the affinity graph and diffusion geometry");
    cmd->add_option("--in", in_path, "input dataset CSV");
    cmd->add_option("--out", out_dir, "output directory (default out)");
    cmd->add_option("--config", config_path, "JSON config file");
    kernel.attach(cmd);
    cmd->add_option("--k", k, "flow neighborhood size (default 10)");
    cmd->add_option("--m", m, "number of eigenpairs (default 25, clamped to N)");
    cmd->add_option("--t", t, "diffusion time (default 1)");
  }

  int run() {
    const Json file = config_path.empty() ? Json::object() : load_json(config_path);
    std::string in = in_path, out = out_dir;
    overlay(file, "input", in);
    overlay(file, "out", out);
    const Json graph = section_of(file, "graph");
    Index rk = k, rm = m;
    int rt = t;
    overlay(graph, "k", rk);
    overlay(graph, "m", rm);
    overlay(graph, "t", rt);
    if (cmd->count("--in")) in = in_path;
    if (cmd->count("--out")) out = out_dir;
    if (cmd->count("--k")) rk = k;
    if (cmd->count("--m")) rm = m;
    if (cmd->count("--t")) rt = t;

    require(!in.empty(), "build-graph: --in is required");
    require_file(in, "run `generate` first or point --in at a dataset CSV");
    const FlowDataset ds = load_dataset_csv(in);
    const KernelParams params = kernel.resolve(file, ds);
    rm = std::min(rm, ds.size());
    const GraphBundle bundle = build_graph_bundle(ds, params, rk, rm, rt);

    ensure_dir(out);
    std::vector<std::string> acols;
    for (Index j = 0; j < ds.size(); ++j) acols.push_back("a" + std::to_string(j));
    save_matrix_csv(bundle.affinity.weights, acols, join(out, "affinity.csv"));

    std::ostringstream hoods;
    hoods << "id";
    for (Index j = 0; j < rk; ++j) hoods << ",n" << j;
    hoods << "\n";
    for (Index i = 0; i < ds.size(); ++i) {
      hoods << i;
      for (Index nb : bundle.neighborhoods.neighbors[static_cast<std::size_t>(i)])
        hoods << "," << nb;
      hoods << "\n";
    }
    write_text(join(out, "neighborhoods.csv"), hoods.str());

    std::vector<std::string> ccols;
    for (Index j = 0; j < rm; ++j) ccols.push_back("c" + std::to_string(j));
    save_matrix_csv(bundle.map.coords, ccols, join(out, "diffusion_coords.csv"));
    save_matrix_csv(bundle.map.eigenvalues, {"lambda"}, join(out, "eigenvalues.csv"));

    Json run{{"command", "build-graph"},
             {"input", in},
             {"out", out},
             {"kernel", kernel_params_to_json(params)},
             {"graph", Json{{"k", rk}, {"m", rm}, {"t", rt}}}};
    save_json(run, join(out, "run.json"));
    std::cout << "build-graph: N=" << ds.size() << " sigma=" << params.sigma << " -> " << out
              << "/\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------

struct EmbedCmd {
  CLI::App* cmd = nullptr;
  KernelFlags kernel;
  std::string in_path, out_dir = "out", config_path;
  TrainerConfig tc;
  std::string xi_hidden_text, psi_hidden_text;
  bool early_stop_flag = false;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("embed", "train the point embedder and vector field");
    cmd->add_option("--in", in_path, "input dataset CSV");
    cmd->add_option("--out", out_dir, "output directory (default out)");
    cmd->add_option("--config", config_path, "JSON config file (e.g. a previous run.json)");
    kernel.attach(cmd);
    cmd->add_option("--k", tc.k, "flow neighbors per batch (default 10)");
    cmd->add_option("--n-random", tc.n_random, "random non-neighbors per batch (default 10)");
    cmd->add_option("--lr", tc.lr, "Adam learning rate (default 1e-3)");
    cmd->add_option("--epochs", tc.epochs, "training epochs (default 100)");
    cmd->add_option("--weight-dist", tc.weight_dist, "distance loss weight (default 1)");
    cmd->add_option("--weight-flow", tc.weight_flow, "flow loss weight (default 1)");
    cmd->add_option("--weight-smooth", tc.weight_smooth, "smoothness weight (default 0)");
    cmd->add_option("--t", tc.t, "diffusion time (default 1)");
    cmd->add_option("--m", tc.m, "eigenpair count (default 25, clamped to N)");
    cmd->add_option("--seed", tc.seed, "training seed");
    cmd->add_option("--test-fraction", tc.test_fraction, "held-out fraction (default 0.2)");
    cmd->add_flag("--early-stop", early_stop_flag, "stop when train loss plateaus");
    cmd->add_option("--xi-hidden", xi_hidden_text, "embedder hidden sizes, e.g. 64,64,64");
    cmd->add_option("--psi-hidden", psi_hidden_text, "field hidden sizes, e.g. 64,64,64");
    cmd->add_option("--leaky-slope", tc.leaky_slope, "Leaky ReLU slope (default 0.01)");
  }

  int run() {
    const Json file = config_path.empty() ? Json::object() : load_json(config_path);
    std::string in = in_path, out = out_dir;
    overlay(file, "input", in);
    overlay(file, "out", out);
    TrainerConfig resolved;
    const Json jt = section_of(file, "trainer");
    overlay(jt, "k", resolved.k);
    overlay(jt, "n_random", resolved.n_random);
    overlay(jt, "lr", resolved.lr);
    overlay(jt, "epochs", resolved.epochs);
    overlay(jt, "weight_flow", resolved.weight_flow);
    overlay(jt, "weight_dist", resolved.weight_dist);
    overlay(jt, "weight_smooth", resolved.weight_smooth);
    overlay(jt, "t", resolved.t);
    overlay(jt, "m", resolved.m);
    overlay(jt, "seed", resolved.seed);
    overlay(jt, "test_fraction", resolved.test_fraction);
    overlay(jt, "early_stop", resolved.early_stop);
    overlay(jt, "early_stop_tol", resolved.early_stop_tol);
    overlay(jt, "early_stop_patience", resolved.early_stop_patience);
    overlay(jt, "xi_hidden", resolved.xi_hidden);
    overlay(jt, "psi_hidden", resolved.psi_hidden);
    overlay(jt, "leaky_slope", resolved.leaky_slope);

    if (cmd->count("--in")) in = in_path;
    if (cmd->count("--out")) out = out_dir;
    if (cmd->count("--k")) resolved.k = tc.k;
    if (cmd->count("--n-random")) resolved.n_random = tc.n_random;
    if (cmd->count("--lr")) resolved.lr = tc.lr;
    if (cmd->count("--epochs")) resolved.epochs = tc.epochs;
    if (cmd->count("--weight-dist")) resolved.weight_dist = tc.weight_dist;
    if (cmd->count("--weight-flow")) resolved.weight_flow = tc.weight_flow;
    if (cmd->count("--weight-smooth")) resolved.weight_smooth = tc.weight_smooth;
    if (cmd->count("--t")) resolved.t = tc.t;
    if (cmd->count("--m")) resolved.m = tc.m;
    if (cmd->count("--seed")) resolved.seed = tc.seed;
    if (cmd->count("--test-fraction")) resolved.test_fraction = tc.test_fraction;
    if (cmd->count("--early-stop")) resolved.early_stop = early_stop_flag;
    if (cmd->count("--xi-hidden")) resolved.xi_hidden = parse_index_list(xi_hidden_text);
    if (cmd->count("--psi-hidden")) resolved.psi_hidden = parse_index_list(psi_hidden_text);
    if (cmd->count("--leaky-slope")) resolved.leaky_slope = tc.leaky_slope;

    require(!in.empty(), "embed: --in is required");
    require_file(in, "run `generate` first or point --in at a dataset CSV");
    const FlowDataset ds = load_dataset_csv(in);
    const KernelParams params = kernel.resolve(file, ds);
    resolved.m = std::min(resolved.m, ds.size());
    resolved.validate();

    const EmbeddingResult result = run_pipeline(ds, params, resolved);

    ensure_dir(out);
    save_embedding_csv(result, ds.labels, join(out, "embedding.csv"));
    save_json(result_sidecar_to_json(result, params), join(out, "result.json"));
    save_json(mlp_to_json(result.xi), join(out, "xi.json"));
    save_json(mlp_to_json(result.psi), join(out, "psi.json"));
    Json run{{"command", "embed"},
             {"input", in},
             {"out", out},
             {"kernel", kernel_params_to_json(params)},
             {"trainer", trainer_config_to_json(resolved)}};
    save_json(run, join(out, "run.json"));

    const double final_total = result.train_curve.back().total;
    std::cout << "embed: N=" << ds.size() << " epochs=" << result.train_curve.size()
              << " final_train_total=" << final_total << " -> " << join(out, "embedding.csv")
              << "\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------

struct DiffuseCmd {
  CLI::App* cmd = nullptr;
  KernelFlags kernel;
  std::string in_path, out_dir = "out", config_path, t_text = "10,20,40";
  Index start = -1;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("diffuse", "propagate diffusion from a start point");
    cmd->add_option("--in", in_path, "input dataset CSV");
    cmd->add_option("--out", out_dir, "output directory (default out)");
    cmd->add_option("--config", config_path, "JSON config file");
    kernel.attach(cmd);
    cmd->add_option("--start", start,
                    "start index; -1 picks the minimal-pseudotime point (default)");
    cmd->add_option("--t", t_text, "comma-separated diffusion times (default 10,20,40)");
  }

  int run() {
    const Json file = config_path.empty() ? Json::object() : load_json(config_path);
    std::string in = in_path, out = out_dir;
    overlay(file, "input", in);
    overlay(file, "out", out);
    const Json jd = section_of(file, "diffuse");
    Index rstart = start;
    std::vector<int> t_list = parse_int_list(t_text);
    overlay(jd, "start", rstart);
    if (jd.contains("t_list")) t_list = jd.at("t_list").get<std::vector<int>>();
    if (cmd->count("--in")) in = in_path;
    if (cmd->count("--out")) out = out_dir;
    if (cmd->count("--start")) rstart = start;
    if (cmd->count("--t")) t_list = parse_int_list(t_text);
    require(!t_list.empty(), "diffuse: --t must list at least one time");

    require(!in.empty(), "diffuse: --in is required");
    require_file(in, "run `generate` first or point --in at a dataset CSV");
    const FlowDataset ds = load_dataset_csv(in);
    const KernelParams params = kernel.resolve(file, ds);
    if (rstart < 0) {
      rstart = 0;
      if (ds.has_pseudotime()) {
        for (Index i = 1; i < ds.size(); ++i)
          if (ds.pseudotime[i] < ds.pseudotime[rstart]) rstart = i;
      }
    }
    require(rstart < ds.size(), "diffuse: start index out of range");

    const auto entropies = diffusion_entropy_comparison(ds, params, t_list, rstart);
    const DiffusionOperator directed = row_normalize(build_affinity_matrix(ds, params), ds);

    ensure_dir(out);
    std::ostringstream ecsv;
    ecsv << "t,directed_entropy,symmetric_entropy\n";
    for (const auto& [t, pair] : entropies) {
      ecsv << t << "," << format_double(pair.directed) << "," << format_double(pair.symmetric)
           << "\n";
    }
    write_text(join(out, "entropies.csv"), ecsv.str());

    PlotSpec heat;
    heat.mode = PlotMode::diffusion_heat;
    for (int t : t_list) {
      const Vector p = propagate(directed, rstart, t);
      std::ostringstream pcsv;
      pcsv << "index,probability\n";
      for (Index i = 0; i < p.size(); ++i) pcsv << i << "," << format_double(p[i]) << "\n";
      const std::string stem = "t" + std::to_string(t);
      write_text(join(out, "distribution_" + stem + ".csv"), pcsv.str());
      render_diffusion_heat_svg(ds, p, heat, join(out, "heat_" + stem + ".svg"));
    }

    Json jt_list = t_list;
    Json run{{"command", "diffuse"},
             {"input", in},
             {"out", out},
             {"kernel", kernel_params_to_json(params)},
             {"diffuse", Json{{"start", rstart}, {"t_list", jt_list}}}};
    save_json(run, join(out, "run.json"));
    std::cout << "diffuse: start=" << rstart << " times=" << t_list.size() << " -> " << out
              << "/\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------

struct EvalCmd {
  CLI::App* cmd = nullptr;
  std::string dataset_path, result_dir, out_dir, entropy_t_text;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("eval", "compute metrics for a trained embedding");
    cmd->add_option("--dataset", dataset_path, "dataset CSV the embedding was trained on");
    cmd->add_option("--result", result_dir, "directory written by `embed`");
    cmd->add_option("--out", out_dir, "output directory (default: the result directory)");
    cmd->add_option("--entropy-t", entropy_t_text,
                    "optional comma-separated times for the entropy comparison");
  }

  int run() {
    require(!dataset_path.empty(), "eval: --dataset is required");
    require(!result_dir.empty(), "eval: --result is required");
    const std::string out = out_dir.empty() ? result_dir : out_dir;
    require_file(dataset_path, "dataset CSV not found");
    require_file(join(result_dir, "embedding.csv"), "run `embed` first");
    require_file(join(result_dir, "result.json"), "run `embed` first");

    const FlowDataset ds = load_dataset_csv(dataset_path);
    const Json sidecar = load_json(join(result_dir, "result.json"));
    const TrainerConfig config = trainer_config_from_json(sidecar.at("config"));
    const KernelParams params = kernel_params_from_json(sidecar.at("kernel"));
    EmbeddingResult result = load_embedding_csv(join(result_dir, "embedding.csv"));
    result.config = config;
    require(result.embeddings.rows() == ds.size(),
            "eval: embedding and dataset row counts differ");

    const GraphBundle bundle =
        build_graph_bundle(ds, params, config.k, config.m, config.t);
    MetricReport report = evaluate_metrics(result, bundle.d_manifold, bundle.neighborhoods);

    if (ds.has_labels()) {
      const std::set<int> classes(ds.labels.begin(), ds.labels.end());
      if (classes.size() == 2) {
        require_file(join(result_dir, "xi.json"), "run `embed` first");
        result.xi = mlp_from_json(load_json(join(result_dir, "xi.json")));
        result.velocity_at_points = pushforward(result.xi, ds.positions, ds.velocities);
        const auto [plain, velocity] = strand_separability(result, ds.labels);
        report.strand_accuracy_plain = plain;
        report.strand_accuracy_velocity = velocity;
      }
    }
    if (!entropy_t_text.empty()) {
      report.diffusion_entropies =
          diffusion_entropy_comparison(ds, params, parse_int_list(entropy_t_text));
    }

    ensure_dir(out);
    save_json(metric_report_to_json(report), join(out, "metrics.json"));
    Json run{{"command", "eval"},
             {"dataset", dataset_path},
             {"result", result_dir},
             {"out", out}};
    save_json(run, join(out, "run.json"));

    std::cout << "stress                 " << report.stress << "\n";
    std::cout << "flow_cosine            " << report.flow_cosine << " (excluded "
              << report.flow_cosine_excluded << ")\n";
    if (report.strand_accuracy_plain) {
      std::cout << "strand_accuracy_plain  " << *report.strand_accuracy_plain << "\n";
      std::cout << "strand_accuracy_veloc  " << *report.strand_accuracy_velocity << "\n";
    }
    for (const auto& [t, pair] : report.diffusion_entropies) {
      std::cout << "entropy t=" << t << "  directed=" << pair.directed
                << " symmetric=" << pair.symmetric << "\n";
    }
    std::cout << "eval: wrote " << join(out, "metrics.json") << "\n";
    return 0;
  }
};

// ---------------------------------------------------------------------------

struct PlotCmd {
  CLI::App* cmd = nullptr;
  std::string result_dir, dataset_path, distribution_path, out_dir = "out";
  std::string mode_text = "scatter", color_text = "none";
  Index grid = 12;
  double canvas = 640;

  void setup(CLI::App& app) {
    cmd = app.add_subcommand("plot", "render an SVG view of a result");
    cmd->add_option("--result", result_dir, "directory written by `embed`");
    cmd->add_option("--dataset", dataset_path, "dataset CSV (needed for label/pseudotime colors)");
    cmd->add_option("--distribution", distribution_path,
                    "distribution CSV from `diffuse` (diffusion_heat mode)");
    cmd->add_option("--mode", mode_text, "scatter | quiver | streamlines | diffusion_heat");
    cmd->add_option("--color-by", color_text, "label | pseudotime | none");
    cmd->add_option("--grid", grid, "arrows/seeds per axis (default 12)");
    cmd->add_option("--canvas", canvas, "canvas side length in px (default 640)");
    cmd->add_option("--out", out_dir, "output directory (default out)");
  }

  int run() {
    PlotSpec spec;
    spec.mode = plot_mode_from_string(mode_text);
    spec.color_by = color_by_from_string(color_text);
    spec.grid = grid;
    spec.canvas = canvas;
    spec.validate();
    ensure_dir(out_dir);
    const std::string svg_path = join(out_dir, "plot_" + mode_text + ".svg");

    if (spec.mode == PlotMode::diffusion_heat) {
      require(!dataset_path.empty() && !distribution_path.empty(),
              "plot: diffusion_heat needs --dataset and --distribution");
      require_file(dataset_path, "dataset CSV not found");
      require_file(distribution_path, "run `diffuse` first");
      const FlowDataset ds = load_dataset_csv(dataset_path);
      const auto [m, header] = load_matrix_csv(distribution_path);
      require(header.size() == 2 && header[1] == "probability",
              "plot: expected an index,probability CSV");
      render_diffusion_heat_svg(ds, m.col(1), spec, svg_path);
    } else {
      require(!result_dir.empty(), "plot: --result is required");
      require_file(join(result_dir, "embedding.csv"), "run `embed` first");
      EmbeddingResult result = load_embedding_csv(join(result_dir, "embedding.csv"));
      if (spec.mode == PlotMode::quiver || spec.mode == PlotMode::streamlines) {
        require_file(join(result_dir, "psi.json"), "run `embed` first; the field is required");
        result.psi = mlp_from_json(load_json(join(result_dir, "psi.json")));
      }
      FlowDataset ds;
      const FlowDataset* ds_ptr = nullptr;
      if (!dataset_path.empty()) {
        require_file(dataset_path, "dataset CSV not found");
        ds = load_dataset_csv(dataset_path);
        ds_ptr = &ds;
      }
      render_svg(result, spec, svg_path, ds_ptr);
    }

    Json run{{"command", "plot"},
             {"result", result_dir},
             {"dataset", dataset_path},
             {"distribution", distribution_path},
             {"mode", mode_text},
             {"color_by", color_text},
             {"grid", grid},
             {"canvas", canvas},
             {"out", out_dir}};
    save_json(run, join(out_dir, "run.json"));
    std::cout << "plot: wrote " << svg_path << "\n";
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow-aware 2-d embedding of velocity point clouds"};
  app.require_subcommand(1);

  GenerateCmd generate;
  BuildGraphCmd build_graph;
  EmbedCmd embed;
  DiffuseCmd diffuse;
  EvalCmd eval;
  PlotCmd plot;
  generate.setup(app);
  build_graph.setup(app);
  embed.setup(app);
  diffuse.setup(app);
  eval.setup(app);
  plot.setup(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (generate.cmd->parsed()) return generate.run();
    if (build_graph.cmd->parsed()) return build_graph.run();
    if (embed.cmd->parsed()) return embed.run();
    if (diffuse.cmd->parsed()) return diffuse.run();
    if (eval.cmd->parsed()) return eval.run();
    if (plot.cmd->parsed()) return plot.run();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
