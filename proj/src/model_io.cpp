#include "masscover/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "masscover/blockrate.hpp"
#include "masscover/errors.hpp"

namespace masscover {

namespace {

struct Section {
  std::string name;
  std::vector<std::vector<double>> rows;
  int line;
};

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "line " << lineno << ": expected 'name = values'";
      throw ConfigError(os.str());
    }
    Section sec;
    sec.line = lineno;
    {
      std::istringstream ns(line.substr(0, eq));
      ns >> sec.name;
      std::string extra;
      if (sec.name.empty() || (ns >> extra)) {
        std::ostringstream os;
        os << "line " << lineno << ": bad section name";
        throw ConfigError(os.str());
      }
    }
    std::string rest = line.substr(eq + 1);
    std::vector<double> row;
    std::istringstream vs(rest);
    std::string tok;
    while (vs >> tok) {
      if (tok == "/") {
        sec.rows.push_back(row);
        row.clear();
        continue;
      }
      try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        std::ostringstream os;
        os << "line " << lineno << ": malformed number '" << tok << "' in section '"
           << sec.name << "'";
        throw ConfigError(os.str());
      }
    }
    sec.rows.push_back(row);
    out.push_back(std::move(sec));
  }
  return out;
}

}  // namespace

Model parse_model(const std::string& text) {
  std::optional<std::vector<double>> p_raw, m_raw;
  std::optional<std::vector<std::vector<double>>> rho_raw, trans_raw;
  int rho_line = 0, trans_line = 0;

  for (auto& sec : tokenize(text)) {
    auto flat = [&sec]() {
      if (sec.rows.size() != 1) {
        std::ostringstream os;
        os << "line " << sec.line << ": section '" << sec.name << "' must be a single row";
        throw ConfigError(os.str());
      }
      return sec.rows[0];
    };
    if (sec.name == "p") {
      p_raw = flat();
    } else if (sec.name == "m") {
      m_raw = flat();
    } else if (sec.name == "rho") {
      rho_raw = sec.rows;
      rho_line = sec.line;
    } else if (sec.name == "trans") {
      trans_raw = sec.rows;
      trans_line = sec.line;
    } else {
      std::ostringstream os;
      os << "line " << sec.line << ": unknown section '" << sec.name << "'";
      throw ConfigError(os.str());
    }
  }

  if (!rho_raw) throw ConfigError("model needs a 'rho' section");
  std::size_t rows = rho_raw->size();
  std::size_t cols = rho_raw->front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    if ((*rho_raw)[r].size() != cols) {
      std::ostringstream os;
      os << "line " << rho_line << ": ragged 'rho' row " << r + 1;
      throw ConfigError(os.str());
    }
  }
  std::vector<double> rho_flat;
  rho_flat.reserve(rows * cols);
  for (auto& r : *rho_raw) rho_flat.insert(rho_flat.end(), r.begin(), r.end());
  DistortionMatrix rho_full(rows, cols, std::move(rho_flat));

  if (!p_raw && !trans_raw) throw ConfigError("model needs a 'p' or a 'trans' section");

  std::optional<std::vector<double>> trans_flat;
  if (trans_raw) {
    if (trans_raw->size() != rows)
      throw ConfigError("'trans' must be square over the source alphabet (row count)");
    std::vector<double> t;
    for (auto& r : *trans_raw) {
      if (r.size() != rows) {
        std::ostringstream os;
        os << "line " << trans_line << ": 'trans' must be square over the source alphabet";
        throw ConfigError(os.str());
      }
      t.insert(t.end(), r.begin(), r.end());
    }
    trans_flat = std::move(t);
  }

  ProbabilityVector p_full = [&]() {
    if (p_raw) {
      if (p_raw->size() != rows)
        throw ConfigError("'p' dimension does not match 'rho' row count");
      return ProbabilityVector(*p_raw);
    }
    // Markov model without an explicit initial law: default to stationary.
    return MarkovSource::stationary(rows, *trans_flat).initial();
  }();

  MassVector m = [&]() {
    if (m_raw) {
      if (m_raw->size() != cols)
        throw ConfigError("'m' dimension does not match 'rho' column count");
      return MassVector::from_mass(*m_raw);
    }
    return MassVector::ones(cols);
  }();

  // Markov models keep the full alphabet (tuples are stripped at solve
  // time); IID models strip zero-probability source symbols now.
  StrippedLaw law = trans_flat
                        ? StrippedLaw{p_full, [&] {
                                        std::vector<std::size_t> all(rows);
                                        for (std::size_t i = 0; i < rows; ++i) all[i] = i;
                                        return all;
                                      }(),
                                      false}
                        : strip_zero_symbols(p_full);
  DistortionMatrix rho_kept =
      law.changed ? rho_full.select_rows(law.kept) : rho_full;
  std::vector<double> offsets = rho_kept.row_minima();
  DistortionMatrix rho_norm = normalize_distortion(rho_kept);

  Model model{std::move(law.p),
              std::move(m),
              std::move(rho_norm),
              std::move(trans_flat),
              p_raw && trans_flat ? std::optional<ProbabilityVector>(ProbabilityVector(*p_raw))
                                  : std::nullopt,
              std::move(law.kept),
              std::move(offsets),
              m_raw.has_value()};
  return model;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_row(std::ostringstream& os, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ' ';
    os << fmt(row[i]);
  }
}

}  // namespace

std::string emit_model(const Model& model) {
  std::ostringstream os;
  if (!model.transition || model.initial) {
    os << "p =";
    for (std::size_t i = 0; i < model.p.size(); ++i) os << ' ' << fmt(model.p[i]);
    os << '\n';
  }
  if (model.had_mass) {
    os << "m =";
    for (double mv : model.m.mass()) os << ' ' << fmt(mv);
    os << '\n';
  }
  os << "rho = ";
  for (std::size_t x = 0; x < model.rho.rows(); ++x) {
    if (x) os << " / ";
    std::vector<double> row(model.rho.cols());
    for (std::size_t y = 0; y < model.rho.cols(); ++y) row[y] = model.rho.at(x, y);
    emit_row(os, row);
  }
  os << '\n';
  if (model.transition) {
    std::size_t s = model.p.size();
    os << "trans = ";
    for (std::size_t i = 0; i < s; ++i) {
      if (i) os << " / ";
      std::vector<double> row(model.transition->begin() + i * s,
                              model.transition->begin() + (i + 1) * s);
      emit_row(os, row);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace masscover
