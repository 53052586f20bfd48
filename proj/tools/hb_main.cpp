// Batch front door: resolve a model (file or preset), run an analysis, and
// emit machine-readable JSON/CSV. Exit codes: 0 success, 1 usage error,
// 2 invalid model, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hypobridge/fluct.hpp"
#include "hypobridge/model_io.hpp"
#include "hypobridge/presets.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hypobridge;

namespace {

struct InputOptions {
  std::string model_path;
  std::string preset_name;
  double rank_tol = 1e-10;
  bool rank_tol_set = false;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  auto* model = cmd->add_option("--model", in.model_path,
                                "Model file (JSON, or TOML via .toml)");
  auto* pre = cmd->add_option("--preset", in.preset_name,
                              "Preset name (see `hb list`)");
  model->excludes(pre);
  cmd->add_option("--rank-tol", in.rank_tol,
                  "Relative rank tolerance for the controllability test")
      ->check(CLI::Range(1e-15, 0.1))
      ->each([&in](const std::string&) { in.rank_tol_set = true; });
}

struct ResolvedModel {
  ModelSpec spec;
  std::string label;
};

ResolvedModel resolve_model(const InputOptions& in) {
  if (in.model_path.empty() == in.preset_name.empty()) {
    throw CLI::ValidationError(
        "input", "exactly one of --model or --preset is required");
  }
  if (!in.preset_name.empty()) {
    Preset p = preset(in.preset_name);
    if (in.rank_tol_set) {
      p.spec = build_model(p.spec.A, p.spec.B, in.rank_tol);
    }
    return {p.spec, p.name};
  }
  const ModelFile mf = read_model_file(in.model_path);
  const double tol =
      in.rank_tol_set ? in.rank_tol : mf.rank_tol.value_or(1e-10);
  return {build_model(mf.A, mf.B, tol), mf.label.value_or(in.model_path)};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> parse_grid(const std::string& spec_str,
                               bool include_zero) {
  std::vector<double> grid;
  if (spec_str.rfind("uniform:", 0) == 0) {
    const int n = std::stoi(spec_str.substr(8));
    if (n < 2) throw CLI::ValidationError("--grid", "need at least 2 points");
    if (include_zero) {
      for (int i = 0; i < n; ++i) {
        grid.push_back(static_cast<double>(i) / (n - 1));
      }
    } else {
      for (int i = 1; i <= n; ++i) {
        grid.push_back(static_cast<double>(i) / n);
      }
    }
    return grid;
  }
  std::stringstream ss(spec_str);
  std::string tok;
  while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
  if (grid.empty()) throw CLI::ValidationError("--grid", "empty grid");
  return grid;
}

Vector parse_vector(const std::string& text, Index want) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  if (static_cast<Index>(vals.size()) != want) {
    throw CLI::ValidationError(
        "vector", "expected " + std::to_string(want) + " components, got " +
                      std::to_string(vals.size()));
  }
  Vector v(want);
  for (Index i = 0; i < want; ++i) v(i) = vals[static_cast<size_t>(i)];
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_csv_value(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

int run_analyze(const InputOptions& in, const std::string& out_dir,
                const std::string& export_model) {
  const ResolvedModel rm = resolve_model(in);
  const Filtration filt = filtration(rm.spec, in.rank_tol);
  const UBlocks u = u_blocks(rm.spec, filt);
  const Matrix v = v_matrix(u);
  double cond = 0.0;
  const Matrix vinv = v_inverse(v, &cond);

  json doc;
  doc["label"] = rm.label;
  doc["d"] = rm.spec.d();
  doc["m"] = rm.spec.m();
  doc["n"] = filt.n;
  doc["dims"] = filt.dims;
  doc["basis"] = matrix_json(filt.basis);
  json ub = json::array();
  for (const auto& blk : u.blocks) ub.push_back(matrix_json(blk));
  doc["u_blocks"] = ub;
  doc["principal_part"] = matrix_json(principal_part(rm.spec, filt));
  doc["V"] = matrix_json(v);
  doc["V_inverse"] = matrix_json(vinv);
  doc["v_condition_equilibrated"] = cond;
  doc["rank_tol"] = in.rank_tol;

  if (!export_model.empty()) {
    ModelFile mf;
    mf.A = rm.spec.A;
    mf.B = rm.spec.B;
    mf.label = rm.label;
    write_model_file(export_model, mf);
  }

  if (out_dir.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    fs::create_directories(out_dir);
    open_out(fs::path(out_dir) / "analysis.json") << doc.dump(2) << "\n";
  }
  return 0;
}

int run_bridge(const InputOptions& in, double eps, const std::string& x_str,
               const std::string& y_str, const std::string& grid_str,
               int n_paths, std::uint64_t seed, const std::string& out_dir) {
  const ResolvedModel rm = resolve_model(in);
  const Index d = rm.spec.d();
  const Vector x = parse_vector(x_str, d);
  const Vector y = parse_vector(y_str, d);
  const std::vector<double> grid = parse_grid(grid_str, false);

  const BridgeLaw law = bridge_law(rm.spec, eps, x, y, grid);

  fs::create_directories(out_dir);
  {
    auto out = open_out(fs::path(out_dir) / "mean.csv");
    out << "t";
    for (Index c = 0; c < d; ++c) out << ",x" << (c + 1);
    out << "\n";
    for (size_t i = 0; i < grid.size(); ++i) {
      write_csv_value(out, grid[i]);
      for (Index c = 0; c < d; ++c) {
        out << ",";
        write_csv_value(out, law.mean_path(static_cast<Index>(i), c));
      }
      out << "\n";
    }
  }
  {
    auto out = open_out(fs::path(out_dir) / "cov.csv");
    out << "t1,t2,i,j,value\n";
    for (size_t a = 0; a < grid.size(); ++a) {
      for (size_t b = 0; b < grid.size(); ++b) {
        const Matrix blk = law.cov_block(a, b);
        for (Index i = 0; i < d; ++i) {
          for (Index j = 0; j < d; ++j) {
            write_csv_value(out, grid[a]);
            out << ",";
            write_csv_value(out, grid[b]);
            out << "," << (i + 1) << "," << (j + 1) << ",";
            write_csv_value(out, blk(i, j));
            out << "\n";
          }
        }
      }
    }
  }
  {
    const auto paths = sample_bridge(law, n_paths, seed);
    auto out = open_out(fs::path(out_dir) / "paths.csv");
    out << "path,t";
    for (Index c = 0; c < d; ++c) out << ",x" << (c + 1);
    out << "\n";
    for (size_t p = 0; p < paths.size(); ++p) {
      for (size_t i = 0; i < grid.size(); ++i) {
        out << p << ",";
        write_csv_value(out, grid[i]);
        for (Index c = 0; c < d; ++c) {
          out << ",";
          write_csv_value(out, paths[p](static_cast<Index>(i), c));
        }
        out << "\n";
      }
    }
  }
  return 0;
}

int run_converge(const InputOptions& in, const std::string& eps_str,
                 const std::string& grid_str, const std::string& out_dir) {
  const ResolvedModel rm = resolve_model(in);
  std::vector<double> eps_list;
  {
    std::stringstream ss(eps_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) eps_list.push_back(std::stod(tok));
  }
  const std::vector<double> grid = parse_grid(grid_str, true);
  const ConvergenceReport rep = convergence_report(rm.spec, eps_list, grid);

  json doc;
  doc["label"] = rm.label;
  doc["eps"] = rep.eps;
  doc["grid"] = rep.grid;
  doc["sup_cov_error"] = rep.sup_cov_error;
  doc["sup_mean_error"] = rep.sup_mean_error;
  doc["slope"] = rep.slope;
  json corr = json::array();
  for (size_t i = 0; i < rep.correction_times.size(); ++i) {
    json c;
    c["t"] = rep.correction_times[i];
    c["leading"] = matrix_json(rep.corrections[i].leading);
    c["correction"] = matrix_json(rep.corrections[i].correction);
    corr.push_back(c);
  }
  doc["alpha_expansion"] = corr;

  fs::create_directories(out_dir);
  open_out(fs::path(out_dir) / "report.json") << doc.dump(2) << "\n";

  auto out = open_out(fs::path(out_dir) / "errors.csv");
  out << "eps,t1,t2,error\n";
  for (size_t e = 0; e < rep.eps.size(); ++e) {
    for (size_t i = 0; i < grid.size(); ++i) {
      for (size_t j = 0; j < grid.size(); ++j) {
        write_csv_value(out, rep.eps[e]);
        out << ",";
        write_csv_value(out, grid[i]);
        out << ",";
        write_csv_value(out, grid[j]);
        out << ",";
        write_csv_value(out, rep.pair_errors[e](static_cast<Index>(i),
                                                static_cast<Index>(j)));
        out << "\n";
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypoelliptic Gaussian bridge laws and small-time fluctuations"};
  app.require_subcommand(1);

  InputOptions in_analyze, in_bridge, in_converge;
  std::string out_analyze, export_model;
  auto* analyze = app.add_subcommand(
      "analyze", "Controllability data, u-blocks, V and its inverse");
  add_input_options(analyze, in_analyze);
  analyze->add_option("--out", out_analyze,
                      "Output directory (default: stdout)");
  analyze->add_option("--export-model", export_model,
                      "Also write the resolved model as a JSON model file");

  double eps = 1.0;
  std::string x_str, y_str, grid_bridge = "uniform:21", out_bridge;
  int n_paths = 100;
  std::uint64_t seed = 1;
  auto* bridge = app.add_subcommand(
      "bridge", "Conditioned-process law on a grid plus exact samples");
  add_input_options(bridge, in_bridge);
  bridge->add_option("--eps", eps, "Noise scale")->required();
  bridge->add_option("--x", x_str, "Start point, comma separated")
      ->required();
  bridge->add_option("--y", y_str, "Conditioning endpoint")->required();
  bridge->add_option("--grid", grid_bridge,
                     "Grid: 'uniform:N' (N points k/N) or a comma list");
  bridge->add_option("--paths", n_paths, "Number of sampled paths");
  bridge->add_option("--seed", seed, "Sampling seed");
  bridge->add_option("--out", out_bridge, "Output directory")->required();

  std::string eps_list, grid_conv = "uniform:21", out_conv;
  auto* converge = app.add_subcommand(
      "converge", "Covariance-convergence report toward the limit law");
  add_input_options(converge, in_converge);
  converge->add_option("--eps-list", eps_list,
                       "Decreasing eps values, comma separated (>= 3)")
      ->required();
  converge->add_option("--grid", grid_conv,
                       "Grid: 'uniform:N' (N points on [0,1]) or comma list");
  converge->add_option("--out", out_conv, "Output directory")->required();

  auto* list = app.add_subcommand("list", "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (list->parsed()) {
      for (const auto& name : preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (analyze->parsed()) {
      return run_analyze(in_analyze, out_analyze, export_model);
    }
    if (bridge->parsed()) {
      return run_bridge(in_bridge, eps, x_str, y_str, grid_bridge, n_paths,
                        seed, out_bridge);
    }
    if (converge->parsed()) {
      return run_converge(in_converge, eps_list, grid_conv, out_conv);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NotControllableError& e) {
    std::cerr << "model invalid: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "model invalid: " << e.what() << "\n";
    return 2;
  } catch (const UnknownPresetError& e) {
    std::cerr << "model invalid: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedDimensionError& e) {
    std::cerr << "model invalid: " << e.what() << "\n";
    return 2;
  } catch (const ShapeMismatchError& e) {
    std::cerr << "model invalid: " << e.what() << "\n";
    return 2;
  } catch (const NonSquareError& e) {
    std::cerr << "model invalid: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
