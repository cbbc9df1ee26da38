#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "kltensor/classify.hpp"
#include "kltensor/coo_io.hpp"
#include "kltensor/em.hpp"
#include "kltensor/ingest.hpp"
#include "kltensor/klpc.hpp"
#include "kltensor/loss.hpp"
#include "kltensor/model_io.hpp"
#include "kltensor/synth.hpp"

namespace kltensor::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

BinSpec load_spec(const std::string& spec) {
  if (spec == "iris") return iris_binspec();
  return read_binspec_file(spec);
}

void print_factor_summary(std::ostream& out, const CpdModel& model) {
  for (std::size_t k = 0; k < model.rank(); ++k) {
    out << "component " << k << " weight " << format_double(model.weights()[static_cast<Eigen::Index>(k)])
        << '\n';
    for (std::size_t n = 0; n < model.order(); ++n) {
      const auto col = model.column(n, k);
      const auto top = std::max_element(col.begin(), col.end());
      const auto support = std::count_if(col.begin(), col.end(), [](double p) { return p > 0.0; });
      double mean = 0.0;
      for (std::size_t j = 0; j < col.size(); ++j) mean += static_cast<double>(j) * col[j];
      out << "  mode " << n << ": support " << support << '/' << col.size() << ", mode bin "
          << (top - col.begin()) << " (p=" << format_double(*top) << "), mean bin "
          << format_double(mean) << '\n';
    }
  }
}

struct PcArgs {
  std::string input, output, binspec;
};

int cmd_pc(const PcArgs& a, std::ostream& out) {
  const SparseTensor t = read_coo_file(a.input);
  const CpdModel model = kl_principal_component(t);
  ModelFile file{model, std::nullopt, std::nullopt};
  if (!a.binspec.empty()) file.binspec = load_spec(a.binspec);
  write_model_file(a.output, file);
  out << "lambda " << format_double(model.weights()[0]) << '\n';
  print_factor_summary(out, model);
  return kExitOk;
}

struct FitArgs {
  std::string input, output, report, binspec, init;
  std::size_t rank = 1;
  std::size_t max_iters = 500;
  double tol = 1e-9;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const SparseTensor t = read_coo_file(a.input);
  FitOptions opts;
  opts.rank = a.rank;
  opts.max_iters = a.max_iters;
  opts.rel_tol = a.tol;
  opts.restarts = a.restarts;
  opts.seed = a.seed;
  opts.threads = a.threads;
  if (!a.init.empty()) {
    opts.init = InitMethod::Provided;
    opts.initial = read_model_file(a.init).model;
  }
  const FitResult result = fit(t, opts);

  ModelFile file{result.model, std::nullopt, std::nullopt};
  if (!a.binspec.empty()) file.binspec = load_spec(a.binspec);
  write_model_file(a.output, file);

  if (!a.report.empty()) {
    auto csv = open_output(a.report);
    csv << "restart,iteration,loss,mass_residual\n";
    for (std::size_t r = 0; r < result.report.restarts.size(); ++r) {
      const auto& trace = result.report.restarts[r];
      for (std::size_t i = 0; i < trace.losses.size(); ++i) {
        csv << r << ',' << i << ',' << format_double(trace.losses[i]) << ','
            << format_double(trace.mass_residuals[i]) << '\n';
      }
    }
  }

  const FitReport& rep = result.report;
  out << "restart " << rep.restart_index << " of " << rep.restarts.size() << '\n'
      << "iterations " << rep.iterations << '\n'
      << "converged " << (rep.converged ? "yes" : "no") << '\n'
      << "loss " << format_double(rep.losses.back()) << '\n'
      << "mass_residual " << format_double(rep.mass_residual) << '\n'
      << "dead_components " << rep.dead_components << '\n';
  print_factor_summary(out, result.model);
  if (!rep.converged) {
    err << "warning: no convergence within " << a.max_iters << " iterations\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

struct LossArgs {
  std::string input, model;
};

int cmd_loss(const LossArgs& a, std::ostream& out, std::ostream& err) {
  const SparseTensor t = read_coo_file(a.input);
  const CpdModel model = read_model_file(a.model).model;
  if (model.shape() != t.shape()) throw std::invalid_argument("model and tensor shapes differ");
  out << "gkl_full " << format_double(gkl_full(t, model).value) << '\n';
  out << "gkl_simplified " << format_double(gkl_simplified(t, model).value) << '\n';
  out << "mle_nll " << format_double(mle_nll(t, normalize(model)).value) << '\n';
  try {
    out << "equivalence_residual " << format_double(equivalence_offset_check(t, model)) << '\n';
  } catch (const std::invalid_argument& e) {
    out << "equivalence_residual n/a\n";
    err << "note: " << e.what() << '\n';
  }
  return kExitOk;
}

struct SynthArgs {
  std::string model, output, trace;
  std::int64_t draws = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  if (a.draws <= 0) throw std::invalid_argument("--draws must be positive");
  const CpdModel model = read_model_file(a.model).model;
  const double mass = total_model_mass(model);
  if (std::abs(mass - 1.0) > NormalizedModel::kWeightSumTolerance) {
    err << "warning: weights sum to " << format_double(mass) << "; normalizing\n";
  }
  const NormalizedModel truth = normalize(model);
  std::ofstream trace_out;
  DrawTrace trace;
  if (!a.trace.empty()) {
    trace_out = open_output(a.trace);
    trace_out << "# draw component indices...\n";
    trace = [&](std::uint64_t d, std::size_t k, std::span<const Index> idx) {
      trace_out << d << ' ' << k;
      for (Index i : idx) trace_out << ' ' << i;
      trace_out << '\n';
    };
  }
  const SparseTensor data =
      sample_tensor(truth, static_cast<std::uint64_t>(a.draws), a.seed, a.threads, trace);
  write_coo_file(a.output, data);
  out << "draws " << a.draws << "\nnonzeros " << data.nnz() << '\n';
  return kExitOk;
}

struct DiscretizeArgs {
  std::string csv, label_col = "class", spec = "iris", out_dir;
  bool per_class = false;
};

void check_label_filename(const std::string& label) {
  if (label.empty() || label.find_first_of("/\\") != std::string::npos || label == "." ||
      label == ".." || label == "all") {
    throw std::invalid_argument("label '" + label + "' cannot be used as a file name");
  }
}

int cmd_discretize(const DiscretizeArgs& a, std::ostream& out) {
  const BinSpec spec = load_spec(a.spec);
  const LabeledDataset data = read_csv_file(a.csv, a.label_col);
  fs::create_directories(a.out_dir);
  const auto pooled = discretize(data, spec, false);
  write_coo_file(fs::path(a.out_dir) / "all.coo", pooled.at("all"));
  out << "all: mass " << format_double(total_mass(pooled.at("all"))) << ", nonzeros "
      << pooled.at("all").nnz() << '\n';
  if (a.per_class) {
    for (const auto& [label, t] : discretize(data, spec, true)) {
      check_label_filename(label);
      write_coo_file(fs::path(a.out_dir) / (label + ".coo"), t);
      out << label << ": mass " << format_double(total_mass(t)) << ", nonzeros " << t.nnz()
          << '\n';
    }
  }
  auto spec_out = open_output(fs::path(a.out_dir) / "binspec.txt");
  write_binspec(spec_out, spec);
  out << "shape";
  for (std::size_t d : spec.shape()) out << ' ' << d;
  out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string csv, label_col = "class", spec = "iris", output;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const BinSpec spec = load_spec(a.spec);
  const LabeledDataset data = read_csv_file(a.csv, a.label_col);
  const ClassConditionalModel model = train_supervised(discretize(data, spec, true), spec);
  write_model_file(a.output, to_model_file(model));
  for (std::size_t c = 0; c < model.labels.size(); ++c) {
    out << model.labels[c] << " prior " << format_double(model.prior[c]) << '\n';
  }
  return kExitOk;
}

struct ClassifyArgs {
  std::string model, csv, label_col, predictions;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const ClassConditionalModel model = to_classifier(read_model_file(a.model));
  const LabeledDataset data = read_csv_file(a.csv, a.label_col);

  std::ofstream pred_out;
  if (!a.predictions.empty()) {
    pred_out = open_output(a.predictions);
    pred_out << "row,true_label,predicted";
    for (const auto& l : model.labels) pred_out << ",posterior_" << l;
    pred_out << '\n';
  }

  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    Prediction p;
    try {
      p = predict(model, data.rows[r]);
    } catch (const std::out_of_range& e) {
      throw std::out_of_range("row " + std::to_string(r + 1) + ": " + e.what());
    }
    const std::string truth = data.has_labels() ? data.labels[r] : std::string();
    if (data.has_labels()) {
      ++confusion[truth][p.label];
      if (truth == p.label) ++correct;
    }
    if (pred_out.is_open()) {
      pred_out << r + 1 << ',' << truth << ',' << p.label;
      for (double q : p.posterior) pred_out << ',' << format_double(q);
      pred_out << '\n';
    }
  }

  out << "samples " << data.rows.size() << '\n';
  if (data.has_labels()) {
    out << "accuracy " << format_double(static_cast<double>(correct) /
                                        static_cast<double>(data.rows.size()))
        << '\n';
    out << "confusion (rows: true, columns: predicted)\n";
    out << "true\\predicted";
    for (const auto& l : model.labels) out << '\t' << l;
    out << '\n';
    for (const auto& [truth, row] : confusion) {
      out << truth;
      for (const auto& l : model.labels) {
        const auto it = row.find(l);
        out << '\t' << (it == row.end() ? 0 : it->second);
      }
      out << '\n';
    }
  }
  return kExitOk;
}

struct AlignArgs {
  std::string a, b, csv;
};

int cmd_align(const AlignArgs& args, std::ostream& out) {
  const ModelFile fa = read_model_file(args.a);
  const ModelFile fb = read_model_file(args.b);
  const Alignment al = align_components(fa.model, fb.model);
  out << "permutation";
  for (std::size_t p : al.permutation) out << ' ' << p;
  out << "\nmean_tv " << format_double(al.distance) << '\n';
  out << "mode,component_a,component_b,tv\n";
  for (std::size_t n = 0; n < fa.model.order(); ++n) {
    for (std::size_t k = 0; k < fa.model.rank(); ++k) {
      const std::size_t l = al.permutation[k];
      out << n << ',' << k << ',' << l << ','
          << format_double(tv_distance(fa.model.column(n, k), fb.model.column(n, l))) << '\n';
    }
  }
  if (!args.csv.empty()) {
    auto csv = open_output(args.csv);
    csv << "mode,bin,component,value_a,value_b\n";
    for (std::size_t n = 0; n < fa.model.order(); ++n) {
      for (std::size_t k = 0; k < fa.model.rank(); ++k) {
        const auto ca = fa.model.column(n, k);
        const auto cb = fb.model.column(n, al.permutation[k]);
        for (std::size_t j = 0; j < ca.size(); ++j) {
          csv << n << ',' << j << ',' << k << ',' << format_double(ca[j]) << ','
              << format_double(cb[j]) << '\n';
        }
      }
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse nonnegative tensor toolkit: KL principal components and EM CPD fitting",
               "kltensor"};
  app.require_subcommand(1);

  PcArgs pc;
  auto* pc_cmd = app.add_subcommand("pc", "Closed-form rank-1 KL principal component");
  pc_cmd->add_option("input", pc.input, "COO tensor file")->required();
  pc_cmd->add_option("output", pc.output, "Model file to write")->required();
  pc_cmd->add_option("--binspec", pc.binspec, "Attach a bin spec ('iris' or a sidecar file)");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Rank-K CPD fit under generalized KL divergence");
  fit_cmd->add_option("input", fa.input, "COO tensor file")->required();
  fit_cmd->add_option("output", fa.output, "Model file to write")->required();
  fit_cmd->add_option("-k,--rank", fa.rank, "Number of components")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-iters", fa.max_iters, "Iteration cap per restart")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--tol", fa.tol, "Relative loss-decrease threshold")
      ->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--restarts", fa.restarts, "Random restarts")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fa.seed, "Random seed");
  fit_cmd->add_option("--report", fa.report, "Per-iteration CSV report");
  fit_cmd->add_option("--threads", fa.threads, "Worker threads (0 = all)");
  fit_cmd->add_option("--binspec", fa.binspec, "Attach a bin spec ('iris' or a sidecar file)");
  fit_cmd->add_option("--init", fa.init, "Start from this model instead of random restarts");

  LossArgs la;
  auto* loss_cmd = app.add_subcommand("loss", "Evaluate all objective forms for a model");
  loss_cmd->add_option("input", la.input, "COO tensor file")->required();
  loss_cmd->add_option("model", la.model, "Model file")->required();

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a count tensor from a model");
  synth_cmd->add_option("model", sa.model, "Model file")->required();
  synth_cmd->add_option("output", sa.output, "COO file to write")->required();
  synth_cmd->add_option("-m,--draws", sa.draws, "Number of draws")->required();
  synth_cmd->add_option("--seed", sa.seed, "Random seed");
  synth_cmd->add_option("--threads", sa.threads, "Worker threads (0 = all)");
  synth_cmd->add_option("--trace", sa.trace, "Write one line per draw");

  DiscretizeArgs da;
  auto* disc_cmd = app.add_subcommand("discretize", "Bin a labeled CSV into count tensors");
  disc_cmd->add_option("--csv", da.csv, "Input CSV")->required();
  disc_cmd->add_option("--label-col", da.label_col, "Label column name");
  disc_cmd->add_flag("--per-class", da.per_class, "Also write one tensor per label");
  disc_cmd->add_option("--spec", da.spec, "'iris' or a bin spec file");
  disc_cmd->add_option("-o,--out", da.out_dir, "Output directory")->required();

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Supervised naive Bayes from per-class KL PCs");
  train_cmd->add_option("--csv", ta.csv, "Input CSV")->required();
  train_cmd->add_option("--label-col", ta.label_col, "Label column name");
  train_cmd->add_option("--spec", ta.spec, "'iris' or a bin spec file");
  train_cmd->add_option("-o,--out", ta.output, "Model file to write")->required();

  ClassifyArgs ca;
  auto* cls_cmd = app.add_subcommand("classify", "Naive-Bayes predictions for a CSV");
  cls_cmd->add_option("--model", ca.model, "Model file with a bin spec")->required();
  cls_cmd->add_option("--csv", ca.csv, "Input CSV")->required();
  cls_cmd->add_option("--label-col", ca.label_col, "Label column for accuracy");
  cls_cmd->add_option("--predictions", ca.predictions, "Per-row predictions CSV");

  AlignArgs aa;
  auto* align_cmd = app.add_subcommand("align", "Match components of two models");
  align_cmd->add_option("--a", aa.a, "Reference model")->required();
  align_cmd->add_option("--b", aa.b, "Model to permute")->required();
  align_cmd->add_option("--csv", aa.csv, "Long-format factor comparison CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (pc_cmd->parsed()) return cmd_pc(pc, out);
    if (fit_cmd->parsed()) return cmd_fit(fa, out, err);
    if (loss_cmd->parsed()) return cmd_loss(la, out, err);
    if (synth_cmd->parsed()) return cmd_synth(sa, out, err);
    if (disc_cmd->parsed()) return cmd_discretize(da, out);
    if (train_cmd->parsed()) return cmd_train(ta, out);
    if (cls_cmd->parsed()) return cmd_classify(ca, out);
    if (align_cmd->parsed()) return cmd_align(aa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace kltensor::cli
