#include "infoloc/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "infoloc/bounds.hpp"
#include "infoloc/channels.hpp"
#include "infoloc/distillsim.hpp"
#include "infoloc/errors.hpp"
#include "infoloc/measures.hpp"
#include "infoloc/tolerances.hpp"
#include "infoloc/version.hpp"

namespace infoloc::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

json with_manifest(json body, const json& manifest_fields) {
  json manifest = manifest_fields;
  manifest["tool_version"] = kVersion;
  manifest["output_digest"] = "sha256:" + sha256_hex(body.dump());
  body["manifest"] = std::move(manifest);
  return body;
}

namespace {

struct Options {
  std::string catalog;
  std::string params;
  std::string dims;
  std::string file;
  std::string config_path;
  std::string out;
  std::string format = "json";
  bool timing = false;
  std::optional<int> copies;
  std::optional<int> restarts;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  // distill
  std::string spectrum;
  std::string n_list;
  std::optional<double> noise_rate;
  std::optional<double> target;
  // scan
  std::optional<int> trials;
  std::optional<double> scan_tolerance;
  // protocol
  std::string run_file;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

json scalar_from_text(const std::string& text) {
  std::size_t used = 0;
  try {
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

// "k=v,k2=v2"; values that are numbers become numbers. A "dims" value may use
// ':' or ';' as separators since ',' separates pairs.
json parse_params(const std::string& text) {
  json params = json::object();
  for (const auto& pair : split_list(text)) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("--params expects k=v pairs, got '" + pair + "'");
    std::string value = pair.substr(eq + 1);
    const std::string key = pair.substr(0, eq);
    if (key == "dims") {
      for (auto& ch : value)
        if (ch == ':' || ch == ';' || ch == 'x') ch = ',';
      params[key] = value;
    } else {
      params[key] = scalar_from_text(value);
    }
  }
  return params;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    const json v = scalar_from_text(item);
    if (!v.is_number()) throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    out.push_back(v.get<double>());
  }
  return out;
}

struct LoadedState {
  DensityOperator rho;
  json inputs;
};

LoadedState load_state(const Options& o) {
  if (!o.file.empty() && !o.catalog.empty()) throw ValidationError("give either --catalog or --file, not both");
  if (!o.file.empty()) {
    const std::string text = read_file(o.file);
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("'" + o.file + "': " + e.what());
    }
    return {state_from_json(doc), json{{"file", o.file}, {"file_sha256", sha256_hex(text)}}};
  }
  if (o.catalog.empty()) throw ValidationError("a state is required: --catalog <name> or --file <path>");
  json params = parse_params(o.params);
  if (!o.dims.empty()) params["dims"] = o.dims;
  return {catalog(o.catalog, params), json{{"catalog", o.catalog}, {"params", params}}};
}

OptimizerConfig load_config(const Options& o, OptimizerConfig base) {
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0' && o.config_path.empty())
    base = config_from_json(read_json(env), base);
  if (!o.config_path.empty()) base = config_from_json(read_json(o.config_path), base);
  if (o.copies) base.copies = *o.copies;
  if (o.restarts) base.restarts = *o.restarts;
  if (o.seed) base.seed = *o.seed;
  if (o.threads) base.threads = *o.threads;
  base.validate();
  return base;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) return csv_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Manifest lines as "# key: value" comments ahead of the CSV body.
std::string csv_with_manifest(const std::string& body, json manifest) {
  manifest["tool_version"] = kVersion;
  manifest["output_digest"] = "sha256:" + sha256_hex(body);
  std::ostringstream os;
  for (const auto& [k, v] : manifest.items()) os << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  os << body;
  return os.str();
}

// Top-level scalars of a report as key,value rows.
std::string object_csv(const json& report) {
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : report.items())
    if (v.is_primitive()) os << k << "," << csv_cell(v) << "\n";
  return os.str();
}

json info_report(const DensityOperator& rho) {
  json per_party = json::array();
  for (const auto& p : rho.split().occupied_parties()) {
    const ComplexMatrix red = rho.reduced(p);
    per_party.push_back(json{{"party", p},
                             {"dim", rho.split().party_dim(p)},
                             {"S", von_neumann_entropy(red)},
                             {"S_inf", min_entropy(red)}});
  }
  const ComplexMatrix sq = rho.matrix() * rho.matrix();
  const double purity = sq.trace().real();
  return json{{"command", "info"},
              {"factor_dims", rho.split().factor_dims},
              {"parties", rho.split().factor_assignment},
              {"N", rho.num_bits()},
              {"S", von_neumann_entropy(rho)},
              {"I", information(rho)},
              {"S_inf", min_entropy(rho)},
              {"purity", purity},
              {"is_pure", std::abs(purity - 1.0) <= tol::pure},
              {"parties_detail", per_party},
              {"tolerances", {{"pure", tol::pure}, {"log_clamp", tol::log_clamp}}}};
}

struct Emitted {
  std::string text;
};

Emitted emit_json(json body, json manifest, const Options& o, double seconds) {
  if (o.timing) manifest["wall_time_s"] = seconds;
  if (o.format == "csv") return {csv_with_manifest(object_csv(body), manifest)};
  return {with_manifest(std::move(body), manifest).dump(2) + "\n"};
}

Emitted cmd_info(const Options& o, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  auto [rho, inputs] = load_state(o);
  json body = info_report(rho);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return emit_json(std::move(body), json{{"command", "info"}, {"inputs", inputs}}, o, seconds);
}

Emitted cmd_bounds(const Options& o, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  auto [rho, inputs] = load_state(o);
  const OptimizerConfig config = load_config(o, OptimizerConfig{});
  const BoundsReport report = deficit_interval(rho, config);
  json body = report_to_json(report, config);
  body["command"] = "bounds";
  body["violations"] = report_violations(report);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"command", "bounds"}, {"inputs", inputs}, {"config", config_to_json(config)}, {"seed", config.seed}};
  return emit_json(std::move(body), std::move(manifest), o, seconds);
}

std::vector<long long> parse_n_list(const std::string& text) {
  std::vector<long long> out;
  for (const auto& item : split_list(text)) {
    const json v = scalar_from_text(item);
    if (!v.is_number_integer()) throw ValidationError("--n: '" + item + "' is not an integer");
    out.push_back(v.get<long long>());
  }
  if (out.empty()) throw ValidationError("--n needs at least one value");
  return out;
}

Emitted cmd_distill(const Options& o, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  json inputs;
  std::optional<Spectrum> spectrum;
  if (!o.spectrum.empty()) {
    spectrum.emplace(parse_doubles(o.spectrum, "--spectrum"));
    inputs = json{{"spectrum", std::vector<double>(spectrum->probabilities().begin(), spectrum->probabilities().end())}};
  } else {
    auto loaded = load_state(o);
    spectrum.emplace(Spectrum::of(loaded.rho));
    inputs = loaded.inputs;
  }
  if (o.noise_rate.has_value() == o.target.has_value())
    throw ValidationError("distill needs exactly one of --noise-rate or --target");
  const auto ns = parse_n_list(o.n_list);

  json rows = json::array();
  std::ostringstream csv;
  csv << "n,noise_rate,fidelity\n";
  if (o.noise_rate) {
    if (!(*o.noise_rate >= 0.0)) throw ValidationError("--noise-rate must be non-negative", {{"noise_rate", *o.noise_rate, ""}});
    for (long long n : ns) {
      const double f = typical_fidelity(*spectrum, n, *o.noise_rate * static_cast<double>(n));
      rows.push_back(json{{"n", n}, {"noise_rate", *o.noise_rate}, {"fidelity", f}});
      csv << n << "," << csv_number(*o.noise_rate) << "," << csv_number(f) << "\n";
    }
  } else {
    for (const auto& p : rate_curve(*spectrum, ns, *o.target)) {
      rows.push_back(json{{"n", p.n}, {"noise_rate", p.rate}, {"noise_bits", p.noise_bits}, {"fidelity", p.fidelity}});
      csv << p.n << "," << csv_number(p.rate) << "," << csv_number(p.fidelity) << "\n";
    }
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"command", "distill"}, {"inputs", inputs}, {"config", {{"n", ns}}}};
  if (o.noise_rate) manifest["config"]["noise_rate"] = *o.noise_rate;
  if (o.target) manifest["config"]["target"] = *o.target;
  if (o.timing) manifest["wall_time_s"] = seconds;
  if (o.format == "csv") return {csv_with_manifest(csv.str(), manifest)};
  json body{{"command", "distill"},
            {"entropy_bits", spectrum->entropy_bits()},
            {"points", rows},
            {"tolerances", {{"spectrum_sum", 1e-12}}}};
  return {with_manifest(std::move(body), manifest).dump(2) + "\n"};
}

Emitted cmd_protocol_run(const Options& o, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string text = read_file(o.run_file);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + o.run_file + "': " + e.what());
  }
  const auto [rho, protocol] = run_file_from_json(doc);
  const ProtocolRun run = run_protocol(rho, protocol);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"command", "protocol run"}, {"inputs", {{"file", o.run_file}, {"file_sha256", sha256_hex(text)}}}};
  if (o.timing) manifest["wall_time_s"] = seconds;
  if (o.format == "csv") {
    std::ostringstream csv;
    csv << "step,kind,n_bits,entropy,information\n";
    for (const auto& e : run.ledger)
      csv << e.step << "," << e.kind << "," << csv_number(e.n_bits) << "," << csv_number(e.entropy) << ","
          << csv_number(e.information) << "\n";
    return {csv_with_manifest(csv.str(), manifest)};
  }
  const auto& last = run.ledger.back();
  json body{{"command", "protocol run"},
            {"name", protocol.name},
            {"note", protocol.note},
            {"ledger", ledger_to_json(run.ledger)},
            {"final", {{"N", last.n_bits}, {"S", last.entropy}, {"I", last.information}}},
            {"pmm", {{"pass", check_pmm(protocol, rho.split()).pass}, {"tolerance", tol::pmm}}}};
  return {with_manifest(std::move(body), manifest).dump(2) + "\n"};
}

Emitted cmd_scan(const Options& o, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  ScanConfig config;
  if (o.trials) config.trials = *o.trials;
  if (o.seed) config.seed = *o.seed;
  if (o.scan_tolerance) config.tolerance = *o.scan_tolerance;
  if (o.threads) config.threads = *o.threads;
  if (config.trials < 1) throw ValidationError("--trials must be positive", {{"trials", double(config.trials), ""}});
  const ScanReport report = monotonicity_scan(config);
  json body = scan_report_to_json(report, config);
  body["command"] = "scan";
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest{{"command", "scan"},
                {"inputs", json::object()},
                {"config", {{"trials", config.trials}, {"tolerance", config.tolerance}}},
                {"seed", config.seed}};
  return emit_json(std::move(body), std::move(manifest), o, seconds);
}

json error_json(const std::string& kind, const std::string& message, int code,
                const std::vector<Violation>& violations = {}) {
  json v = json::array();
  for (const auto& x : violations) v.push_back(json{{"check", x.check}, {"value", x.value}, {"detail", x.detail}});
  return json{{"error", {{"kind", kind}, {"message", message}, {"violations", v}}}, {"exit_code", code}};
}

void add_state_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--catalog", o.catalog, "named state")->check(CLI::IsMember(catalog_names()));
  cmd->add_option("--params", o.params, "catalog parameters, k=v,...");
  cmd->add_option("--dims", o.dims, "factor dimensions, e.g. 2,2");
  cmd->add_option("--file", o.file, "state JSON file");
}

void add_output_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "write the report here instead of standard output");
  cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--timing", o.timing, "record wall time in the manifest");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Localizable information and quantum deficit toolkit", "infoloc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto* info = app.add_subcommand("info", "entropy, information and reductions of a state");
  add_state_options(info, o);
  add_output_options(info, o);

  auto* bounds = app.add_subcommand("bounds", "bounds on localizable information and the deficit");
  add_state_options(bounds, o);
  add_output_options(bounds, o);
  bounds->add_option("--copies", o.copies, "largest number of copies for the lower bound")->check(CLI::Range(1, 2));
  bounds->add_option("--restarts", o.restarts, "optimizer restarts")->check(CLI::NonNegativeNumber);
  bounds->add_option("--seed", o.seed, "optimizer seed");
  bounds->add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  bounds->add_option("--config", o.config_path, "optimizer config JSON");

  auto* distill = app.add_subcommand("distill", "typical-subspace fidelity and rate curves");
  add_state_options(distill, o);
  add_output_options(distill, o);
  distill->add_option("--spectrum", o.spectrum, "eigenvalues, e.g. 0.9,0.1");
  distill->add_option("--n", o.n_list, "copy counts, e.g. 100,1000")->required();
  distill->add_option("--noise-rate", o.noise_rate, "noise bits per copy");
  distill->add_option("--target", o.target, "target fidelity for the rate curve");

  auto* protocol = app.add_subcommand("protocol", "noisy-LOCC protocols");
  protocol->require_subcommand(1);
  auto* prun = protocol->add_subcommand("run", "run a protocol file and print the ledger");
  prun->add_option("file", o.run_file, "run file (state + steps)")->required();
  add_output_options(prun, o);

  auto* scan = app.add_subcommand("scan", "randomized monotonicity scan of M");
  add_output_options(scan, o);
  scan->add_option("--trials", o.trials, "number of trials");
  scan->add_option("--seed", o.seed, "scan seed");
  scan->add_option("--tolerance", o.scan_tolerance, "dM tolerance");
  scan->add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  // distill defaults to CSV; the other commands to JSON
  if (args.size() > 1 && args[1] == "distill") o.format = "csv";
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << error_json("usage", e.what(), kUsage).dump() << "\n";
    return kUsage;
  }

  try {
    double seconds = 0.0;
    Emitted result;
    if (*info)
      result = cmd_info(o, seconds);
    else if (*bounds)
      result = cmd_bounds(o, seconds);
    else if (*distill)
      result = cmd_distill(o, seconds);
    else if (*prun)
      result = cmd_protocol_run(o, seconds);
    else
      result = cmd_scan(o, seconds);

    if (o.out.empty()) {
      out << result.text;
    } else {
      std::ofstream file(o.out, std::ios::binary);
      if (!file) throw ParseError("cannot write '" + o.out + "'");
      file << result.text;
      if (!file) throw ParseError("write failed for '" + o.out + "'");
    }
    return kOk;
  } catch (const ValidationError& e) {
    err << error_json("validation", e.what(), kValidation, e.violations()).dump() << "\n";
    return kValidation;
  } catch (const DimensionError& e) {
    err << error_json("dimension", e.what(), kValidation).dump() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << error_json("parse", e.what(), kParse).dump() << "\n";
    return kParse;
  } catch (const json::exception& e) {
    err << error_json("parse", e.what(), kParse).dump() << "\n";
    return kParse;
  } catch (const CapacityError& e) {
    err << error_json("capacity", e.what(), kCapacity).dump() << "\n";
    return kCapacity;
  }
}

}  // namespace infoloc::cli
