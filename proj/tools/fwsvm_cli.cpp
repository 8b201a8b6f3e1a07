// fwsvm command line: train / predict / experiment / sweep.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fwsvm/bench/cv.hpp"
#include "fwsvm/bench/experiment.hpp"
#include "fwsvm/bench/synthetic.hpp"
#include "fwsvm/fwsvm.hpp"

namespace {

using namespace fwsvm;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kIo = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct TrainArgs {
  std::string data;
  std::string kernel = "linear";
  double sigma = 1.0;
  double C = 1.0;
  std::string algo = "mfw";
  double epsilon = 1e-5;
  std::size_t max_iter = 1'000'000;
  std::string init = "0";
  std::uint64_t seed = 1;
  std::string model_out;
  bool no_scale = false;
};

int cmd_train(const TrainArgs& a) {
  const Dataset raw = bench::load_libsvm_file(a.data);
  std::optional<ScalingParams> scaling;
  Dataset train = raw;
  if (!a.no_scale) {
    scaling = fit_scaling(raw);
    train = scaling->apply(raw);
  }
  const KernelSpec spec{parse_kernel_kind(a.kernel), a.sigma, a.C};
  spec.validate();
  const StopRule stop{a.epsilon, a.max_iter};

  std::size_t i0 = 0;
  if (a.init == "random") {
    i0 = Rng(a.seed).below(train.size());
  } else {
    const auto v = parse_uint(a.init);
    if (!v || *v >= train.size()) throw ParameterError("--init must be 'random' or an index below N");
    i0 = static_cast<std::size_t>(*v);
  }

  const bench::Algorithm algo = bench::parse_algorithm(a.algo);
  if (algo == bench::Algorithm::mfw_fixed_c) throw ParameterError("--algo must be fw or mfw");
  const bench::FitResult r = bench::fit(train, spec, algo, stop, i0, scaling);

  std::cout << "algo=" << a.algo << " N=" << train.size() << " D=" << train.dim()
            << " svs=" << r.model.num_sv() << " iters=" << r.iterations << " gap=" << format_double(r.gap)
            << " reason=" << to_string(r.reason) << " train_acc=" << format_double(accuracy(r.model, train))
            << '\n';
  if (!a.model_out.empty()) {
    std::ofstream out(a.model_out, std::ios::binary);
    if (!out) throw IoError("cannot write '" + a.model_out + "'");
    save_model(r.model, out);
  }
  return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path) {
  std::ifstream min(model_path, std::ios::binary);
  if (!min) throw IoError("cannot open '" + model_path + "'");
  const TrainedModel model = load_model(min);
  const Dataset data = bench::load_libsvm_file(data_path);

  std::string lines;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int p = predict_raw(model, data.pattern(i));
    hits += p == data.label(i) ? 1 : 0;
    lines += p > 0 ? "+1\n" : "-1\n";
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << lines;
  } else {
    write_file(out_path, lines);
  }
  std::cerr << "accuracy=" << format_double(100.0 * static_cast<double>(hits) / static_cast<double>(data.size()))
            << " (" << hits << "/" << data.size() << ")\n";
  return kOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir) {
  const bench::ExperimentConfig cfg = bench::parse_config(read_file(config_path));
  const Dataset data = bench::load_dataset(cfg);
  const bench::ExperimentReport report = bench::run_experiment(cfg, data);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const auto out_path = std::filesystem::path(out_dir) / cfg.output;
  bench::emit_report(report, out_path);
  write_file(std::filesystem::path(out_dir) / "ratios.csv", bench::format_ratios(report));

  for (const auto& a : report.aggregates())
    std::cout << a.dataset << ' ' << a.kernel << ' ' << a.algo << ": acc " << a.acc[0] << " +- " << a.acc[1]
              << ", svs " << a.svs[0] << " +- " << a.svs[1] << ", iters " << a.iters[0] << " +- " << a.iters[1]
              << '\n';
  for (const auto& r : report.ratios_vs_fw())
    std::cout << r.algo << " vs fw (geometric mean, %): acc " << r.accuracy << ", svs " << r.svs << ", iters "
              << r.iters << '\n';
  std::cout << "wrote " << out_path.string() << '\n';
  return kOk;
}

struct SweepArgs {
  std::string data = "synthetic";
  std::string algo = "fw,mfw";
  std::string grid = "log:1e-5:1e5:11";
  std::string out;
  std::string kernel = "linear";
  double sigma = 1.0;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  double epsilon = 1e-5;
  std::size_t max_iter = 1'000'000;
  std::size_t synthetic_n = 600;
  std::size_t synthetic_dim = 8;
  double synthetic_separation = bench::BlobSpec{}.separation;
};

int cmd_sweep(const SweepArgs& a) {
  Dataset raw = a.data == "synthetic"
                    ? bench::make_gaussian_blobs({a.synthetic_n, a.synthetic_dim, a.synthetic_separation, a.seed})
                    : bench::load_libsvm_file(a.data);
  const Dataset ds = fit_scaling(raw).apply(raw);
  bench::SearchSettings cfg{bench::parse_grid(a.grid), {a.sigma}, parse_kernel_kind(a.kernel), a.folds,
                            StopRule{a.epsilon, a.max_iter}, a.seed};
  cfg.stop.validate();

  std::vector<bench::SweepRow> rows;
  for (const auto& name : bench::detail::split_list(a.algo)) {
    auto part = bench::sweep_C(ds, cfg, bench::parse_algorithm(name));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::string csv = bench::format_sweep(rows);
  if (a.out.empty() || a.out == "-") {
    std::cout << csv;
  } else {
    write_file(a.out, csv);
    std::cout << "wrote " << a.out << " (" << rows.size() << " rows)\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frank-Wolfe SVM training toolkit"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "fit one model");
  t->add_option("--data", train.data, "LibSVM training file")->required();
  t->add_option("--kernel", train.kernel, "linear|rbf")->check(CLI::IsMember({"linear", "rbf"}));
  t->add_option("--sigma", train.sigma, "RBF bandwidth");
  t->add_option("--C", train.C, "regularization");
  t->add_option("--algo", train.algo, "fw|mfw")->check(CLI::IsMember({"fw", "mfw"}));
  t->add_option("--epsilon", train.epsilon, "gap tolerance");
  t->add_option("--max-iter", train.max_iter, "iteration cap");
  t->add_option("--init", train.init, "initial vertex index, or 'random'");
  t->add_option("--seed", train.seed, "seed for --init random");
  t->add_option("--model-out", train.model_out, "where to write the model");
  t->add_flag("--no-scale", train.no_scale, "skip [-1,1] feature scaling");

  std::string model_path, predict_data, predict_out;
  auto* p = app.add_subcommand("predict", "label a data file with a saved model");
  p->add_option("--model", model_path)->required();
  p->add_option("--data", predict_data)->required();
  p->add_option("--out", predict_out, "predictions file (default stdout)");

  std::string config_path, out_dir = ".";
  auto* e = app.add_subcommand("experiment", "run the repeated CV / test protocol");
  e->add_option("--config", config_path, "key=value config file")->required();
  e->add_option("--out-dir", out_dir);

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "CV statistics over a C grid");
  s->add_option("--data", sweep.data, "LibSVM file or 'synthetic'");
  s->add_option("--algo", sweep.algo, "comma list of fw|mfw|mfw_fixed_c");
  s->add_option("--grid", sweep.grid, "C grid: 'log:lo:hi:n' or comma list");
  s->add_option("--out", sweep.out, "CSV output (default stdout)");
  s->add_option("--kernel", sweep.kernel)->check(CLI::IsMember({"linear", "rbf"}));
  s->add_option("--sigma", sweep.sigma);
  s->add_option("--folds", sweep.folds);
  s->add_option("--seed", sweep.seed);
  s->add_option("--epsilon", sweep.epsilon);
  s->add_option("--max-iter", sweep.max_iter);
  s->add_option("--synthetic-n", sweep.synthetic_n);
  s->add_option("--synthetic-dim", sweep.synthetic_dim);
  s->add_option("--synthetic-separation", sweep.synthetic_separation);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (t->parsed()) return cmd_train(train);
    if (p->parsed()) return cmd_predict(model_path, predict_data, predict_out);
    if (e->parsed()) return cmd_experiment(config_path, out_dir);
    if (s->parsed()) return cmd_sweep(sweep);
  } catch (const ParameterError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kData;
  } catch (const IoError& err) {
    std::cerr << "I/O error: " << err.what() << '\n';
    return kIo;
  }
  return kUsage;
}
