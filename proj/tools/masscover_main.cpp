// masscover: mass-weighted covering rates, the classical specializations,
// and seeded codebook experiments on finite alphabets.

#include <cmath>
#include <ctime>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "masscover/blockrate.hpp"
#include "masscover/covering.hpp"
#include "masscover/errors.hpp"
#include "masscover/model_io.hpp"
#include "masscover/output.hpp"
#include "masscover/ratesolver.hpp"
#include "masscover/rng.hpp"

namespace mc = masscover;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr std::uint64_t kDefaultSeed = 0x5EED;

struct CommonOpts {
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  std::string out;
  std::string svg;
};

// Canonical "key=value" config string; its digest goes into the run index.
class RunConfig {
 public:
  explicit RunConfig(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  void set(const std::string& key, double value) { kv_[key] = mc::format_double(value); }
  void set(const std::string& key, std::uint64_t value) { kv_[key] = std::to_string(value); }

  std::string canonical() const {
    std::ostringstream os;
    os << command_;
    for (const auto& [k, v] : kv_) os << '|' << k << '=' << v;
    return os.str();
  }

  const std::string& command() const { return command_; }

 private:
  std::string command_;
  std::map<std::string, std::string> kv_;
};

std::string iso_timestamp() {
  char buf[32];
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void record_run(const RunConfig& cfg, const std::string& csv_path,
                const std::string& summary) {
  std::ostringstream os;
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(mc::fnv1a64(cfg.canonical())));
  os << iso_timestamp() << '\t' << cfg.command() << '\t' << hash << '\t'
     << "v=" << kVersion << '\t' << "rng=" << mc::kRngAlgorithm << '\t'
     << (csv_path.empty() ? "-" : csv_path) << '\t' << summary;
  mc::append_result_record(os.str());
}

std::vector<double> parse_grid(const std::string& spec) {
  double start, step, end;
  char c1, c2;
  std::istringstream is(spec);
  if (!(is >> start >> c1 >> step >> c2 >> end) || c1 != ':' || c2 != ':' || !(step > 0.0))
    throw mc::ConfigError("grid must be start:step:end with step > 0");
  std::vector<double> out;
  long count = std::lround((end - start) / step);
  for (long i = 0; i <= count; ++i) {
    double d = start + static_cast<double>(i) * step;
    if (d > end + step * 1e-9) break;
    out.push_back(d);
  }
  if (out.empty()) throw mc::ConfigError("empty grid");
  return out;
}

std::vector<double> parse_prob_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw mc::ConfigError("malformed probability list: " + s);
    }
  }
  if (out.empty()) throw mc::ConfigError("empty probability list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      long v = std::stol(tok);
      if (v < 1) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw mc::ConfigError("malformed integer list: " + s);
    }
  }
  if (out.empty()) throw mc::ConfigError("empty integer list");
  return out;
}

std::string curve_csv(const mc::RateCurve& curve) {
  std::ostringstream os;
  os << "D,R_nats,slope,I_star,L_star\n";
  for (const auto& pt : curve.points) {
    os << mc::format_double(pt.D) << ',' << mc::format_double(pt.R.value()) << ','
       << mc::format_double(pt.slope) << ',' << mc::format_double(pt.I_star) << ','
       << mc::format_double(pt.L_star) << '\n';
  }
  return os.str();
}

void maybe_write_svg(const std::string& path, const mc::RateCurve& curve) {
  if (path.empty()) return;
  std::vector<double> xs, ys;
  for (const auto& pt : curve.points) {
    xs.push_back(pt.D);
    ys.push_back(pt.R.value());
  }
  mc::write_file_atomic(path, mc::render_svg_curve(xs, ys, "D", "R (nats)"));
}

void warn_clamped(const mc::RateCurve& curve) {
  if (curve.clamped_count > 0)
    std::cerr << "warning: " << curve.clamped_count
              << " grid point(s) above rho_max were clamped (the rate is constant there)\n";
}

void log_model_notes(const mc::Model& model) {
  if (model.kept_symbols.size() != model.rho_offsets.size()) return;
  bool stripped = false;
  for (std::size_t i = 0; i < model.kept_symbols.size(); ++i)
    if (model.kept_symbols[i] != i) stripped = true;
  if (stripped) {
    std::cerr << "note: zero-probability source symbols stripped; kept original indices [";
    for (std::size_t i = 0; i < model.kept_symbols.size(); ++i)
      std::cerr << (i ? " " : "") << model.kept_symbols[i];
    std::cerr << "]\n";
  }
  bool shifted = false;
  for (double o : model.rho_offsets)
    if (o != 0.0) shifted = true;
  if (shifted) {
    std::cerr << "note: distortion rows normalized; per-row offsets [";
    for (std::size_t i = 0; i < model.rho_offsets.size(); ++i)
      std::cerr << (i ? " " : "") << mc::format_double(model.rho_offsets[i]);
    std::cerr << "]\n";
  }
}

int cmd_rate(const std::string& input, double d, bool bits, const CommonOpts& common) {
  mc::Model model = mc::load_model(input);
  log_model_notes(model);
  mc::RatePoint pt = mc::solve_rate(model.p, model.m, model.rho, d);
  double unit = bits ? 1.0 / std::log(2.0) : 1.0;
  const char* unit_name = bits ? "bits" : "nats";
  std::cout << "D        = " << mc::format_double(pt.D) << "\n"
            << "R        = " << mc::format_double(pt.R.value() * unit) << " " << unit_name
            << "/symbol\n"
            << "slope    = " << mc::format_double(pt.slope) << "\n"
            << "I_star   = " << mc::format_double(pt.I_star * unit) << "\n"
            << "L_star   = " << mc::format_double(pt.L_star * unit) << "\n";
  std::cout << "Q_opt    =";
  for (std::size_t y = 0; y < pt.Q_opt.size(); ++y)
    std::cout << ' ' << mc::format_double(pt.Q_opt[y]);
  std::cout << "\n";
  if (pt.corner_gap > 0.0)
    std::cerr << "note: slope bisection bracketed a distortion jump of "
              << mc::format_double(pt.corner_gap) << " (corner point)\n";

  std::string csv;
  if (!common.out.empty()) {
    std::ostringstream os;
    os << "D,R_nats,slope,I_star,L_star\n"
       << mc::format_double(pt.D) << ',' << mc::format_double(pt.R.value()) << ','
       << mc::format_double(pt.slope) << ',' << mc::format_double(pt.I_star) << ','
       << mc::format_double(pt.L_star) << '\n';
    csv = os.str();
    mc::write_file_atomic(common.out, csv);
  }
  RunConfig cfg("rate");
  cfg.set("input", input);
  cfg.set("D", d);
  cfg.set("bits", std::uint64_t(bits ? 1 : 0));
  record_run(cfg, common.out, "R=" + mc::format_double(pt.R.value()));
  return 0;
}

int cmd_curve(const std::string& input, const std::string& grid_spec,
              const CommonOpts& common) {
  mc::Model model = mc::load_model(input);
  log_model_notes(model);
  std::vector<double> grid = parse_grid(grid_spec);
  mc::RateCurve curve = mc::rate_curve(model.p, model.m, model.rho, grid, common.threads);
  warn_clamped(curve);
  std::string csv = curve_csv(curve);
  if (!common.out.empty()) mc::write_file_atomic(common.out, csv);
  else std::cout << csv;
  maybe_write_svg(common.svg, curve);
  RunConfig cfg("curve");
  cfg.set("input", input);
  cfg.set("grid", grid_spec);
  record_run(cfg, common.out,
             "points=" + std::to_string(curve.points.size()) +
                 " R_min=" + mc::format_double(curve.r_min) +
                 " D_max=" + mc::format_double(curve.d_max));
  return 0;
}

int cmd_figure1(const CommonOpts& common) {
  // Concentration exponent on the binary cube, source weight 0.4 on symbol 1.
  mc::ProbabilityVector p({0.6, 0.4});
  mc::MassVector m = mc::MassVector::from_mass(p.probs());
  mc::DistortionMatrix rho = mc::DistortionMatrix::hamming(2);
  std::vector<double> grid = parse_grid("0:0.01:1");
  mc::RateCurve curve = mc::rate_curve(p, m, rho, grid, common.threads);
  std::string out = common.out.empty() ? "figure1.csv" : common.out;
  std::string svg = common.svg.empty() ? "figure1.svg" : common.svg;
  mc::write_file_atomic(out, curve_csv(curve));
  std::vector<double> xs, ys;
  for (const auto& pt : curve.points) {
    xs.push_back(pt.D);
    ys.push_back(pt.R.value());
  }
  mc::write_file_atomic(svg, mc::render_svg_curve(xs, ys, "D", "R_C (nats)"));
  std::cout << "wrote " << out << " and " << svg << "\n";
  RunConfig cfg("figure1");
  record_run(cfg, out, "R_min=" + mc::format_double(curve.r_min));
  return 0;
}

int cmd_stein(const std::string& p1s, const std::string& p2s, double alpha, bool has_alpha,
              const std::string& ns, const CommonOpts& common) {
  mc::ProbabilityVector p1(parse_prob_list(p1s));
  mc::ProbabilityVector p2(parse_prob_list(p2s));
  std::string csv;
  std::string summary;
  if (has_alpha) {
    double eps = mc::stein_exponent(p1, p2, alpha);
    std::cout << "epsilon(" << mc::format_double(alpha) << ") = " << mc::format_double(eps)
              << " nats\n";
    summary = "epsilon=" + mc::format_double(eps);
    if (!common.out.empty()) {
      csv = "alpha,epsilon\n" + mc::format_double(alpha) + "," + mc::format_double(eps) + "\n";
      mc::write_file_atomic(common.out, csv);
    }
  } else {
    if (ns.empty()) throw mc::ConfigError("stein needs either --alpha or --n");
    auto n_list = parse_size_list(ns);
    auto pts = mc::stein_experiment(p1, p2, n_list, common.seed);
    std::ostringstream os;
    os << "n,alpha_n,log_beta_n_over_n\n";
    for (const auto& pt : pts)
      os << pt.n << ',' << mc::format_double(pt.alpha_n) << ','
         << mc::format_double(pt.log_beta_n_over_n) << '\n';
    csv = os.str();
    if (!common.out.empty()) mc::write_file_atomic(common.out, csv);
    else std::cout << csv;
    summary = "points=" + std::to_string(pts.size());
  }
  RunConfig cfg("stein");
  cfg.set("p1", p1s);
  cfg.set("p2", p2s);
  if (has_alpha) cfg.set("alpha", alpha);
  if (!ns.empty()) cfg.set("n", ns);
  record_run(cfg, common.out, summary);
  return 0;
}

int cmd_cover(const std::string& input, double d, double eps, const std::string& ns,
              std::uint64_t samples, bool masscap, bool allow_fallback,
              const CommonOpts& common) {
  mc::Model model = mc::load_model(input);
  log_model_notes(model);
  auto n_list = parse_size_list(ns);
  auto kind = masscap ? mc::ConditioningKind::MassCap : mc::ConditioningKind::TypeBall;
  auto trace = mc::achievability_trace(model.p, model.m, model.rho, d, eps, n_list,
                                       common.seed, samples, kind, common.threads,
                                       allow_fallback);
  std::ostringstream os;
  os << "n,coverage,ci,exp_distortion,mass_exponent,target_rate,rejection_rate\n";
  for (const auto& tp : trace) {
    os << tp.report.n << ',' << mc::format_double(tp.report.coverage) << ','
       << mc::format_double(tp.report.coverage_ci) << ','
       << mc::format_double(tp.report.expected_distortion) << ','
       << mc::format_double(tp.report.mass_exponent) << ','
       << mc::format_double(tp.target_rate) << ',' << mc::format_double(tp.rejection_rate)
       << '\n';
  }
  std::string csv = os.str();
  if (!common.out.empty()) mc::write_file_atomic(common.out, csv);
  else std::cout << csv;
  RunConfig cfg("cover");
  cfg.set("input", input);
  cfg.set("D", d);
  cfg.set("eps", eps);
  cfg.set("n", ns);
  cfg.set("samples", samples);
  cfg.set("seed", common.seed);
  cfg.set("rule", masscap ? "masscap" : "typeball");
  record_run(cfg, common.out,
             "last_coverage=" + mc::format_double(trace.back().report.coverage));
  return 0;
}

int cmd_converse(const std::string& input, const std::string& ns, std::size_t trials,
                 const CommonOpts& common) {
  mc::Model model = mc::load_model(input);
  log_model_notes(model);
  if (model.p.size() != 2 || model.rho.cols() != 2)
    throw mc::ConfigError("converse trials are generated on binary alphabets");
  auto n_list = parse_size_list(ns);

  mc::CounterRng rng(mc::derive_stream(common.seed, 0xC04));
  std::size_t done = 0, failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  os << "trial,n,D,lhs,rhs,margin,holds\n";
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t n = n_list[t % n_list.size()];
    // random interior source law and mass function
    double pa = 0.05 + 0.9 * rng.next_double();
    mc::ProbabilityVector p({pa, 1.0 - pa});
    std::vector<double> mass(2);
    for (double& mv : mass) mv = std::exp(-3.0 + 4.0 * rng.next_double());
    mc::MassVector m = mc::MassVector::from_mass(mass);
    // random codebook: size uniform in [1, 32], words uniform over the cube
    std::size_t size = 1 + static_cast<std::size_t>(rng.next_u64() % 32);
    std::vector<mc::Word> words;
    for (std::size_t i = 0; i < size; ++i) {
      mc::Word w(n);
      for (std::size_t j = 0; j < n; ++j)
        w[j] = static_cast<std::uint8_t>(rng.next_u64() & 1);
      words.push_back(std::move(w));
    }
    mc::Codebook cb{n, std::move(words),
                    mc::CodebookMeta{p, mc::NoRule{}, common.seed, 0.0, 0.0, false}};
    mc::ConverseCheck chk = mc::verify_converse(cb, p, m, model.rho);
    double margin = chk.lhs - chk.rhs;
    min_margin = std::min(min_margin, margin);
    if (!chk.holds) ++failures;
    ++done;
    os << t << ',' << n << ',' << mc::format_double(chk.D) << ','
       << mc::format_double(chk.lhs) << ',' << mc::format_double(chk.rhs) << ','
       << mc::format_double(margin) << ',' << (chk.holds ? 1 : 0) << '\n';
  }
  if (!common.out.empty()) mc::write_file_atomic(common.out, os.str());
  std::cout << "converse trials: " << done << ", failures: " << failures
            << ", min margin: " << mc::format_double(min_margin) << "\n";
  RunConfig cfg("converse");
  cfg.set("input", input);
  cfg.set("n", ns);
  cfg.set("trials", std::uint64_t(trials));
  cfg.set("seed", common.seed);
  record_run(cfg, common.out,
             "failures=" + std::to_string(failures) +
                 " min_margin=" + mc::format_double(min_margin));
  if (failures > 0)
    throw mc::AssertionError("mass lower bound failed on " + std::to_string(failures) +
                             " trial(s)");
  return 0;
}

int cmd_block(const std::string& input, double d, const std::string& ks,
              const CommonOpts& common) {
  mc::Model model = mc::load_model(input);
  log_model_notes(model);
  if (!model.transition) throw mc::ConfigError("block runs need a 'trans' section");
  mc::MarkovSource src =
      model.initial ? mc::MarkovSource::with_initial(model.p.size(), *model.transition,
                                                     *model.initial, false)
                    : mc::MarkovSource::stationary(model.p.size(), *model.transition);
  auto k_list = parse_size_list(ks);
  std::ostringstream os;
  os << "k,per_letter_rate,D\n";
  for (std::size_t k : k_list) {
    mc::BlockRatePoint pt = mc::block_rate(src, model.m, model.rho, d, k);
    os << pt.k << ',' << mc::format_double(pt.per_letter_rate.value()) << ','
       << mc::format_double(pt.D) << '\n';
  }
  std::string csv = os.str();
  if (!common.out.empty()) mc::write_file_atomic(common.out, csv);
  else std::cout << csv;
  RunConfig cfg("block");
  cfg.set("input", input);
  cfg.set("D", d);
  cfg.set("k", ks);
  record_run(cfg, common.out, "points=" + ks);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masscover: mass-weighted covering rates on finite alphabets"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string input, grid_spec, ns, ks, p1s, p2s;
  double d = 0.0, eps = 0.0, alpha = 0.0;
  std::uint64_t samples = 200000;
  std::size_t trials = 1000;
  bool bits = false, masscap = false, allow_fallback = false;

  auto add_common = [&](CLI::App* sub, bool with_svg = false) {
    sub->add_option("--seed", common.seed, "RNG seed (sm64c-v1 streams)");
    sub->add_option("--threads", common.threads, "worker threads")->check(CLI::Range(1, 256));
    sub->add_option("--out", common.out, "output CSV path");
    if (with_svg) sub->add_option("--svg", common.svg, "output SVG path");
  };

  auto* rate = app.add_subcommand("rate", "rate at one distortion budget");
  rate->add_option("--input", input, "model file")->required();
  rate->add_option("--D", d, "distortion budget")->required();
  rate->add_flag("--bits", bits, "display in bits (storage stays in nats)");
  add_common(rate);

  auto* curve = app.add_subcommand("curve", "rate curve over a distortion grid");
  curve->add_option("--input", input, "model file")->required();
  curve->add_option("--grid", grid_spec, "start:step:end")->required();
  add_common(curve, true);

  auto* stein = app.add_subcommand("stein", "hypothesis-testing exponents");
  stein->add_option("--p1", p1s, "null law, comma separated")->required();
  stein->add_option("--p2", p2s, "alternative law, comma separated")->required();
  auto* alpha_opt = stein->add_option("--alpha", alpha, "distortion level in [0,1]");
  stein->add_option("--n", ns, "block lengths for the exact experiment");
  add_common(stein);

  auto* cover = app.add_subcommand("cover", "sampled-codebook covering trace");
  cover->add_option("--input", input, "model file")->required();
  cover->add_option("--D", d, "distortion budget")->required();
  cover->add_option("--eps", eps, "achievability slack")->required();
  cover->add_option("--n", ns, "block lengths, comma separated")->required();
  cover->add_option("--samples", samples, "Monte Carlo samples per block length");
  cover->add_flag("--masscap", masscap, "condition on per-letter mass instead of type");
  cover->add_flag("--allow-constant-fallback", allow_fallback,
                  "fall back to a constant word when conditioning is infeasible");
  add_common(cover);

  auto* converse = app.add_subcommand("converse", "randomized mass lower-bound trials");
  converse->add_option("--input", input, "model file")->required();
  converse->add_option("--n", ns, "block lengths, comma separated")->required();
  converse->add_option("--trials", trials, "number of random codebooks");
  add_common(converse);

  auto* block = app.add_subcommand("block", "per-letter k-block rates for a Markov source");
  block->add_option("--input", input, "model file with a trans section")->required();
  block->add_option("--D", d, "distortion budget")->required();
  block->add_option("--k", ks, "block lengths, comma separated")->required();
  add_common(block);

  auto* figure1 = app.add_subcommand("figure1", "binary concentration-exponent curve");
  add_common(figure1, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (rate->parsed()) return cmd_rate(input, d, bits, common);
    if (curve->parsed()) return cmd_curve(input, grid_spec, common);
    if (stein->parsed())
      return cmd_stein(p1s, p2s, alpha, alpha_opt->count() > 0, ns, common);
    if (cover->parsed())
      return cmd_cover(input, d, eps, ns, samples, masscap, allow_fallback, common);
    if (converse->parsed()) return cmd_converse(input, ns, trials, common);
    if (block->parsed()) return cmd_block(input, d, ks, common);
    if (figure1->parsed()) return cmd_figure1(common);
  } catch (const mc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mc::AssertionError& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return 1;
  } catch (const mc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
