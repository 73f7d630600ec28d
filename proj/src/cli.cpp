#include "udpart/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "udpart/diagnostics.hpp"
#include "udpart/io.hpp"
#include "udpart/partition.hpp"
#include "udpart/rearrange.hpp"
#include "udpart/refinement.hpp"
#include "udpart/stochastic.hpp"

namespace udpart::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output sink: "-" is the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }
  std::ostream* operator->() { return os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Turns a JSON config object into flag tokens placed ahead of the real flags,
// so that flags given on the command line take precedence.
void flatten_config(const json& j, std::vector<std::string>& tokens) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_array()) {
      std::string out;
      for (const auto& e : v) out += (out.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      return out;
    }
    return v.dump();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "rule" && value.is_object()) {
      if (value.contains("kind")) tokens.insert(tokens.end(), {"--rule", scalar(value.at("kind"))});
      if (value.contains("alpha")) tokens.insert(tokens.end(), {"--alpha", scalar(value.at("alpha"))});
      if (value.contains("template")) tokens.insert(tokens.end(), {"--template", scalar(value.at("template"))});
      continue;
    }
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    tokens.push_back(flag);
    tokens.push_back(scalar(value));
  }
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> injected;
  std::size_t insert_at = std::min<std::size_t>(1, args.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    std::string path;
    if (a == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      out.push_back(a);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config " + path + ": " + e.what());
    }
    flatten_config(j, injected);
  }
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(), injected.end());
  return out;
}

struct RuleOptions {
  std::string kind = "alpha";
  std::string alpha;
  std::string templ;

  void attach(CLI::App* cmd) {
    cmd->add_option("--rule", kind, "Refinement rule")->check(CLI::IsMember({"alpha", "rho"}));
    cmd->add_option("--alpha", alpha, "Split ratio p/q in ]0,1[");
    cmd->add_option("--template", templ, "Rho template breakpoints, e.g. 0,1/3,2/3,1");
  }

  [[nodiscard]] RefinementRule build() const {
    if (kind == "alpha") {
      if (alpha.empty()) throw UsageError("--rule alpha needs --alpha");
      return RefinementRule::alpha(Fraction::parse(alpha));
    }
    if (templ.empty()) throw UsageError("--rule rho needs --template");
    std::vector<Fraction> b;
    std::stringstream ss(templ);
    std::string item;
    while (std::getline(ss, item, ',')) b.push_back(Fraction::parse(item));
    return RefinementRule::rho(Partition(std::move(b)));
  }
};

std::vector<std::vector<std::optional<double>>> bounds_from_traces(const std::string& path, unsigned s_max) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read traces " + path);
  const json j = json::parse(in);
  std::vector<std::vector<std::optional<double>>> out;
  for (const auto& item : j.at("items")) {
    const auto depth = item.at("depth").get<unsigned>();
    std::vector<std::optional<double>> row(s_max);
    for (unsigned t = 1; t <= std::min(depth, s_max); ++t) row[t - 1] = theoretical_bound(depth, t);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uniformly distributed sequences of partitions", "udpart"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // generate
  RuleOptions gen_rule;
  std::size_t gen_steps = 10;
  std::string gen_out = "-";
  std::string gen_diams;
  auto* generate = app.add_subcommand("generate", "Write rule^n omega for n = 1..steps as JSON Lines");
  gen_rule.attach(generate);
  generate->add_option("--steps,--horizon", gen_steps, "Number of refinement steps")->check(CLI::PositiveNumber);
  generate->add_option("--out", gen_out, "Output JSONL (default stdout)");
  generate->add_option("--diameters", gen_diams, "Diameter sidecar CSV (default <out>.diameters.csv)");

  // rearrange
  std::string re_in;
  std::size_t re_horizon = 0;
  std::string re_out = "-";
  std::string re_traces;
  auto* rearrange = app.add_subcommand("rearrange", "Rearrange a dense stream into a uniformly distributed one");
  rearrange->add_option("--in", re_in, "Input JSONL stream")->required();
  rearrange->add_option("--horizon", re_horizon, "Number of partitions to use (default all)");
  rearrange->add_option("--out", re_out, "Output JSONL (default stdout)");
  rearrange->add_option("--traces", re_traces, "Stage trace JSON");

  // diagnose
  std::string dg_in;
  unsigned dg_smax = 3;
  std::string dg_csv = "-";
  std::string dg_summary;
  std::string dg_plot;
  std::string dg_traces;
  auto* diagnose = app.add_subcommand("diagnose", "Dyadic measures and deviations of a stream");
  diagnose->add_option("--in", dg_in, "Input JSONL stream")->required();
  diagnose->add_option("--s-max", dg_smax, "Deepest dyadic level")->check(CLI::Range(1u, kMaxDyadicLevel));
  diagnose->add_option("--csv", dg_csv, "Report CSV (default stdout)");
  diagnose->add_option("--summary", dg_summary, "Summary JSON");
  diagnose->add_option("--plot", dg_plot, "Plot data CSV (n,s,deviation)");
  diagnose->add_option("--traces", dg_traces, "Rearrangement traces; adds a bound column");

  // bounds
  unsigned bd_smin = 1;
  unsigned bd_smax = 10;
  unsigned bd_tmin = 1;
  std::optional<unsigned> bd_tmax;
  std::string bd_out = "-";
  auto* bounds = app.add_subcommand("bounds", "Tabulate the rearrangement deviation bound B(s,t)");
  bounds->add_option("--s-min", bd_smin)->check(CLI::Range(1u, 30u));
  bounds->add_option("--s-max", bd_smax)->check(CLI::Range(1u, 30u));
  bounds->add_option("--t-min", bd_tmin)->check(CLI::PositiveNumber);
  bounds->add_option("--t-max", bd_tmax, "Largest t (default s for each row)");
  bounds->add_option("--out", bd_out, "Output CSV (default stdout)");

  // conjecture
  RuleOptions cj_rule;
  cj_rule.alpha = "1/3";
  std::size_t cj_trials = 10;
  std::size_t cj_horizon = 100;
  unsigned cj_smax = 1;
  std::uint64_t cj_seed = 0;
  std::string cj_threshold = "1/10";
  std::string cj_in;
  std::string cj_traj;
  std::string cj_agg = "-";
  auto* conjecture = app.add_subcommand("conjecture", "Random arrangements drawn uniformly from each p!");
  cj_rule.attach(conjecture);
  conjecture->add_option("--trials", cj_trials)->check(CLI::PositiveNumber);
  conjecture->add_option("--horizon", cj_horizon)->check(CLI::PositiveNumber);
  conjecture->add_option("--s-max", cj_smax)->check(CLI::Range(1u, kMaxDyadicLevel));
  conjecture->add_option("--seed", cj_seed);
  conjecture->add_option("--threshold", cj_threshold, "Deviation threshold p/q");
  conjecture->add_option("--in", cj_in, "Use this JSONL stream instead of a rule");
  conjecture->add_option("--trajectory", cj_traj, "Trajectory CSV (trial,n,s,deviation)");
  conjecture->add_option("--aggregate", cj_agg, "Aggregate JSON (default stdout)");

  // araki
  std::size_t ar_n = 1000;
  std::uint64_t ar_seed = 0;
  unsigned ar_bits = kDefaultArakiBits;
  std::string ar_traj;
  std::string ar_summary = "-";
  auto* araki = app.add_subcommand("araki", "Random largest-gap splitting with star discrepancy trajectory");
  araki->add_option("--n", ar_n)->check(CLI::PositiveNumber);
  araki->add_option("--seed", ar_seed);
  araki->add_option("--bits", ar_bits, "Grid resolution of the draws")->check(CLI::Range(1u, 64u));
  araki->add_option("--trajectory", ar_traj, "Trajectory CSV (step,point,star_discrepancy,decimal)");
  araki->add_option("--summary", ar_summary, "Summary JSON (default stdout)");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (*generate) {
      RefinementEngine engine(gen_rule.build());
      Sink sink(gen_out, out);
      std::string diam_path = gen_diams;
      if (diam_path.empty() && gen_out != "-") diam_path = gen_out + ".diameters.csv";
      std::optional<Sink> diam_sink;
      if (!diam_path.empty()) {
        diam_sink.emplace(diam_path, out);
        **diam_sink << "n,k,diameter,diameter_decimal,max_denominator_bits\r\n";
      }
      for (std::size_t n = 1; n <= gen_steps; ++n) {
        engine.step();
        const Partition p = engine.partition();
        io::write_jsonl_line(*sink, p);
        if (diam_sink) {
          **diam_sink << n << ',' << p.interval_count() << ',' << engine.diameter().str() << ','
                      << engine.diameter().decimal(12) << ',' << p.max_denominator_bits() << "\r\n";
        }
      }
      return kSuccess;
    }

    if (*rearrange) {
      const auto stream = io::read_jsonl_file(re_in);
      const std::size_t horizon = re_horizon == 0 ? stream.size() : re_horizon;
      if (horizon > stream.size()) throw UsageError("horizon exceeds the input stream");
      const RearrangedSequence result = rearrange_sequence(stream, horizon);
      Sink sink(re_out, out);
      for (const auto& item : result.items) io::write_jsonl_line(*sink, item.sigma);
      if (!re_traces.empty()) {
        json items = json::array();
        for (const auto& item : result.items) {
          items.push_back({{"n", item.n},
                           {"depth", item.depth},
                           {"trace", item.depth == 0 ? json(nullptr) : item.trace.to_json()}});
        }
        Sink traces(re_traces, out);
        *traces << json{{"thresholds", result.thresholds}, {"items", items}}.dump(1) << '\n';
      }
      if (!result.all_ok()) {
        err << "error: a bound check failed; see traces\n";
        return kInvariantViolation;
      }
      return kSuccess;
    }

    if (*diagnose) {
      const auto stream = io::read_jsonl_file(dg_in);
      const UDReport report = convergence_report(stream, dg_smax);
      std::optional<std::vector<std::vector<std::optional<double>>>> bound_cols;
      if (!dg_traces.empty()) bound_cols = bounds_from_traces(dg_traces, dg_smax);
      {
        Sink csv(dg_csv, out);
        report.write_csv(*csv, bound_cols ? &*bound_cols : nullptr);
      }
      if (!dg_summary.empty()) {
        Sink summary(dg_summary, out);
        *summary << report.summary_json().dump(1) << '\n';
      }
      if (!dg_plot.empty()) {
        Sink plot(dg_plot, out);
        report.write_plot_csv(*plot);
      }
      return kSuccess;
    }

    if (*bounds) {
      if (bd_smin > bd_smax) throw UsageError("--s-min exceeds --s-max");
      Sink sink(bd_out, out);
      *sink << "s,t,bound,exact\r\n";
      for (unsigned s = bd_smin; s <= bd_smax; ++s) {
        const unsigned t_hi = bd_tmax.value_or(s);
        for (unsigned t = bd_tmin; t <= t_hi; ++t) {
          if (t > s) {
            err << "warning: skipping s=" << s << " t=" << t << " (t > s)\n";
            continue;
          }
          const Fraction b = theoretical_bound_exact(s, t);
          *sink << s << ',' << t << ',' << format_g(b.to_double()) << ',' << b.str() << "\r\n";
        }
      }
      return kSuccess;
    }

    if (*conjecture) {
      ExperimentConfig config;
      config.trials = cj_trials;
      config.horizon = cj_horizon;
      config.s_max = cj_smax;
      config.seed = cj_seed;
      config.threshold = Fraction::parse(cj_threshold);
      ExperimentReport report;
      if (!cj_in.empty()) {
        const auto stream = io::read_jsonl_file(cj_in);
        report = conjecture_experiment(config, stream);
      } else {
        config.rule = cj_rule.build();
        report = conjecture_experiment(config);
      }
      if (!cj_traj.empty()) {
        Sink traj(cj_traj, out);
        report.write_trajectory_csv(*traj);
      }
      Sink agg(cj_agg, out);
      *agg << report.aggregate_json().dump(1) << '\n';
      return kSuccess;
    }

    if (*araki) {
      SeededRng rng(ar_seed);
      const ArakiResult result = araki_process(ar_n, rng, ar_bits);
      if (!ar_traj.empty()) {
        Sink traj(ar_traj, out);
        *traj << "step,point,star_discrepancy,star_discrepancy_decimal\r\n";
        for (std::size_t i = 0; i < result.points.size(); ++i) {
          *traj << i + 1 << ',' << result.points[i].str() << ',' << result.discrepancy[i].str() << ','
                << result.discrepancy[i].decimal(12) << "\r\n";
        }
      }
      Sink summary(ar_summary, out);
      const Fraction& terminal = result.discrepancy.back();
      *summary << json{{"n", ar_n},
                       {"seed", ar_seed},
                       {"bits", ar_bits},
                       {"terminal_star_discrepancy", terminal.str()},
                       {"terminal_star_discrepancy_decimal", terminal.to_double()}}
                      .dump(1)
               << '\n';
      return kSuccess;
    }
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const io::FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInvariantViolation;
  }
  return kUsageError;
}

}  // namespace udpart::cli
