#include "stlmpc/scenario.hpp"

#include "stlmpc/number_format.hpp"
#include "stlmpc/presets.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace stlmpc {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_number(const std::string& token, const std::string& key) {
  const std::string t = trim(token);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("'" + key + "': not a number: '" + t + "'");
  return v;
}

std::vector<double> numbers(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(to_number(tok, key));
  return out;
}

Eigen::VectorXd vector_of(const std::string& text, const std::string& key) {
  const auto v = numbers(text, key);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Rows separated by ';', entries by whitespace.
Eigen::MatrixXd matrix_of(const std::string& text, const std::string& key) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : split(text, ';')) {
    if (!trim(r).empty()) rows.push_back(numbers(r, key));
  }
  if (rows.empty()) throw ConfigError("'" + key + "': empty matrix");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("'" + key + "': ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return M;
}

std::string required(const pt::ptree& tree, const std::string& key) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) throw ConfigError("missing key '" + key + "'");
  return *v;
}

// A scalar broadcast to m entries or a full vector.
Eigen::VectorXd per_input(const std::string& text, Eigen::Index m, const std::string& key) {
  Eigen::VectorXd v = vector_of(text, key);
  if (v.size() == 1) return Eigen::VectorXd::Constant(m, v(0));
  if (v.size() != m) throw ConfigError("'" + key + "' needs 1 or " + std::to_string(m) + " entries");
  return v;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, std::string name) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ScenarioConfig c;
  c.name = tree.get<std::string>("scenario.name", name);
  auto& sys = c.system;
  sys.A = matrix_of(required(tree, "system.A"), "system.A");
  sys.B = matrix_of(required(tree, "system.B"), "system.B");
  sys.x0 = tree.get_optional<std::string>("system.x0") ? vector_of(*tree.get_optional<std::string>("system.x0"), "system.x0")
                                                        : Eigen::VectorXd::Zero(sys.A.rows());
  const double period = to_number(required(tree, "system.period"), "system.period");
  if (!(period > 0.0)) throw ConfigError("system.period must be positive");
  sys.grid = SamplingGrid(period);
  try {
    sys.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  const Eigen::Index m = sys.input_dim();

  c.formula = required(tree, "formula.text");
  if (auto labels = tree.get_optional<std::string>("formula.labels")) {
    for (const auto& l : split(*labels, ';')) c.labels.push_back(trim(l));
  }

  c.horizon = static_cast<int>(to_number(required(tree, "controller.horizon"), "controller.horizon"));
  c.duration = to_number(required(tree, "controller.duration"), "controller.duration");
  const double steps = c.duration / period;
  if (c.duration < 0.0 || std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("controller.duration must be a nonnegative multiple of the period");
  }
  RunConfig& run = c.run;
  run.steps = static_cast<Step>(std::llround(steps));
  run.builder.horizon = c.horizon;

  const std::string mode = tree.get<std::string>("controller.mode", "receding");
  if (mode == "receding") {
    run.mode = ControlMode::receding;
  } else if (mode == "open_loop") {
    run.mode = ControlMode::open_loop;
  } else {
    throw ConfigError("controller.mode must be receding or open_loop");
  }
  const std::string sem = tree.get<std::string>("controller.semantics", "dsasr");
  if (sem == "dsasr") {
    run.semantics = BaselineSemantics::dsasr;
  } else if (sem == "sr_baseline") {
    run.semantics = BaselineSemantics::sr_baseline;
  } else {
    throw ConfigError("controller.semantics must be dsasr or sr_baseline");
  }
  if (auto lo = tree.get_optional<std::string>("controller.input_lower")) run.builder.inputs.lower = per_input(*lo, m, "controller.input_lower");
  if (auto hi = tree.get_optional<std::string>("controller.input_upper")) run.builder.inputs.upper = per_input(*hi, m, "controller.input_upper");
  if (auto M = tree.get_optional<std::string>("controller.input_weight")) {
    Eigen::MatrixXd W = matrix_of(*M, "controller.input_weight");
    if (W.size() == 1) W = Eigen::MatrixXd::Identity(m, m) * W(0, 0);
    if (!W.isZero()) run.builder.input_weight = W;
  }
  if (auto margin = tree.get_optional<std::string>("controller.constraint_margin")) {
    run.builder.constraint_margin = to_number(*margin, "controller.constraint_margin");
  }
  const std::string past = tree.get<std::string>("controller.past_violations", "keep");
  if (past == "drop") {
    run.builder.past_violations = BuilderConfig::PastViolations::drop;
  } else if (past != "keep") {
    throw ConfigError("controller.past_violations must be keep or drop");
  }
  if (auto idle = tree.get_optional<std::string>("controller.idle_input")) run.idle_input = per_input(*idle, m, "controller.idle_input");

  for (const auto& [section, body] : tree) {
    if (section.rfind("constraint", 0) != 0) continue;
    LinearInputConstraint lc;
    const std::string coeff = trim(required(body, "coefficients"));
    const Eigen::Index nu = c.horizon * m;
    lc.coefficients = coeff == "ones" ? Eigen::RowVectorXd::Ones(nu) : Eigen::RowVectorXd(vector_of(coeff, section).transpose());
    if (lc.coefficients.size() != nu) {
      throw ConfigError("[" + section + "] coefficients need N*m = " + std::to_string(nu) + " entries or 'ones'");
    }
    if (auto lo = body.get_optional<std::string>("lower")) lc.lower = to_number(*lo, section + ".lower");
    if (auto hi = body.get_optional<std::string>("upper")) lc.upper = to_number(*hi, section + ".upper");
    run.builder.inputs.linear.push_back(lc);
  }

  const std::string kind = tree.get<std::string>("noise.kind", "none");
  if (kind == "gaussian") {
    c.noise.kind = NoiseModel::Kind::gaussian;
    c.noise.deviation = vector_of(required(tree, "noise.deviation"), "noise.deviation");
  } else if (kind != "none") {
    throw ConfigError("noise.kind must be none or gaussian");
  }
  c.noise.seed = tree.get<std::uint64_t>("noise.seed", 0);

  run.slack.enabled = tree.get<bool>("slack.enabled", false);
  if (auto w = tree.get_optional<std::string>("slack.weight")) run.slack.weight = to_number(*w, "slack.weight");
  run.slack.state_scale = tree.get<double>("slack.state_scale", 10.0);

  c.trace_path = tree.get<std::string>("output.trace", "");
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : embedded_presets()) out.emplace_back(p.name);
  return out;
}

std::optional<std::string> preset_text(std::string_view name) {
  for (const auto& p : embedded_presets()) {
    if (p.name == name) return std::string(p.text);
  }
  return std::nullopt;
}

ScenarioConfig resolve_config(const std::string& preset_or_path) {
  if (auto text = preset_text(preset_or_path)) {
    std::istringstream in(*text);
    return parse_config(in, preset_or_path);
  }
  return load_config_file(preset_or_path);
}

Scenario compile_scenario(ScenarioConfig config) {
  auto parsed = parse(config.formula, {.state_dim = config.system.state_dim()});
  if (!config.labels.empty() && config.labels.size() != parsed.table.size()) {
    throw ConfigError("formula.labels lists " + std::to_string(config.labels.size()) + " names for " +
                      std::to_string(parsed.table.size()) + " predicates");
  }
  PredicateTable table(parsed.table.state_dim());
  for (PredicateId i = 0; i < parsed.table.size(); ++i) {
    table.add(parsed.table.normal(i), parsed.table.offset(i), config.labels.empty() ? parsed.table.label(i) : config.labels[i]);
  }
  CompiledSpec spec = compile_spec(parsed.formula, std::move(table), config.system.grid);
  if (config.horizon < spec.horizon) {
    throw ConfigError("controller.horizon " + std::to_string(config.horizon) + " is below the formula horizon " +
                      std::to_string(spec.horizon));
  }
  return {std::move(config), std::move(spec)};
}

Trace run_scenario(const Scenario& s) { return run(s.config.system, s.spec, s.config.run, s.config.noise); }

namespace {

std::string num(double v) { return significant_repr(v, 17); }

void put_vector(std::ostream& out, const Eigen::VectorXd& v, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) out << ',' << (i < v.size() ? num(v(i)) : "nan");
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "n/a"; }

}  // namespace

void emit_trace(const Trace& trace, std::ostream& out) {
  if (trace.steps.empty()) throw std::invalid_argument("empty trace");
  const Eigen::Index n = trace.steps.front().x.size();
  const Eigen::Index m = trace.steps.front().u.size();
  out << "k,t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",v" << i;
  out << ",status,objective\n";
  for (const auto& st : trace.steps) {
    out << st.k << ',' << num(st.t);
    put_vector(out, st.x, n);
    put_vector(out, st.u, m);
    put_vector(out, st.v, n);
    out << ',' << to_string(st.status) << ',' << num(st.objective) << '\n';
  }
  write_summary(trace, out);
}

void write_summary(const Trace& trace, std::ostream& out, std::string_view prefix) {
  const auto& s = trace.summary;
  out << prefix << "satisfied = " << (s.readout.satisfied ? "true" : "false") << '\n';
  out << prefix << "snr_db = " << num(s.snr_db) << '\n';
  out << prefix << "sr = " << opt(s.readout.sr) << '\n';
  out << prefix << "dasr = " << opt(s.readout.dasr) << '\n';
  out << prefix << "dsasr = " << opt(s.readout.dsasr) << '\n';
  out << prefix << "prd = " << opt(s.readout.prd) << '\n';
  out << prefix << "rd = " << opt(s.readout.rd) << '\n';
  out << prefix << "solves = " << s.solves << '\n';
  out << prefix << "relaxed_steps = " << s.relaxed_steps << '\n';
}

RecordedTrace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace: missing header");
  const auto header = split(line, ',');
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  for (const auto& h : header) {
    if (h.size() > 1 && h[0] == 'x') ++n;
    if (h.size() > 1 && h[0] == 'u') ++m;
  }
  if (header.size() != static_cast<std::size_t>(4 + 2 * n + m) || header[0] != "k") {
    throw ConfigError("trace: unexpected header '" + line + "'");
  }
  RecordedTrace r;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw ConfigError("trace: row " + std::to_string(row) + " has the wrong number of fields");
    auto read = [&](std::size_t from, Eigen::Index count, std::vector<Eigen::VectorXd>& into) {
      Eigen::VectorXd v(count);
      for (Eigen::Index i = 0; i < count; ++i) v(i) = to_number(f[from + static_cast<std::size_t>(i)], "trace");
      into.push_back(v);
    };
    read(2, n, r.states);
    read(2 + static_cast<std::size_t>(n), m, r.inputs);
    read(2 + static_cast<std::size_t>(n + m), n, r.noise);
    r.status.push_back(f[f.size() - 2]);
    r.objective.push_back(to_number(f.back(), "trace"));
  }
  return r;
}

}  // namespace stlmpc
