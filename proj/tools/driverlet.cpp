// driverlet: operator surface for the record-and-replay toolkit.
//
// Subcommands: record, replay, coverage, diff-oracle, verify.
// Exit codes: 0 ok, 1 internal error, 2 out of coverage, 3 diverged,
//             4 verification failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "driverlet/rec/recorder.hpp"
#include "driverlet/rep/oracle.hpp"
#include "driverlet/rep/replayer.hpp"
#include "driverlet/sim/mockblk.hpp"

namespace fs = std::filesystem;
using namespace driverlet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitOutOfCoverage = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitVerifyFailed = 4;

tpl::Key load_key(const std::string& key_path) {
  std::string path = key_path;
  if (path.empty()) {
    const char* env = std::getenv("DRIVERLET_KEY");
    if (env) path = env;
  }
  if (path.empty())
    throw std::runtime_error("no MAC key: pass --key or set DRIVERLET_KEY");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read key file " + path);
  tpl::Key key((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (key.empty()) throw std::runtime_error("key file " + path + " is empty");
  return key;
}

u64 parse_u64(const std::string& s) {
  size_t pos = 0;
  u64 v = std::stoull(s, &pos, 0);
  if (pos != s.size()) throw std::runtime_error("not a number: " + s);
  return v;
}

rec::Args parse_args(const std::vector<std::string>& kvs) {
  rec::Args args;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::runtime_error("argument must be name=value: " + kv);
    args[kv.substr(0, eq)] = parse_u64(kv.substr(eq + 1));
  }
  return args;
}

std::vector<std::pair<std::string, rec::Args>> parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path);
  std::vector<std::pair<std::string, rec::Args>> runs;
  std::string line;
  u64 line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] != "run" || tok.size() < 2)
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": expected `run <entry> <name=value>...`");
    runs.emplace_back(tok[1], parse_args({tok.begin() + 2, tok.end()}));
  }
  return runs;
}

std::vector<std::string> template_files(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".tpl") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .tpl files in " + dir);
  return files;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string template_file_name(const tpl::InteractionTemplate& t) {
  return (t.name == t.entry ? t.name : t.entry + "_" + t.name) + ".tpl";
}

int cmd_record(const std::string& manifest, const std::string& out_dir, u64 seed,
               const std::string& key_path) {
  tpl::Key key = load_key(key_path);
  auto runs = parse_manifest(manifest);
  rec::CampaignResult result = rec::campaign(runs, seed, key);

  fs::create_directories(fs::path(out_dir) / "templates");
  fs::create_directories(fs::path(out_dir) / "evidence");
  for (const auto& t : result.templates)
    write_file(fs::path(out_dir) / "templates" / template_file_name(t), tpl::serialize(t, true));
  write_file(fs::path(out_dir) / "coverage.txt", result.coverage);
  for (const auto& [tag, text] : result.evidence)
    write_file(fs::path(out_dir) / "evidence" / (tag + ".trace"), text);

  std::cout << result.coverage;
  return kExitOk;
}

struct LoadedPackage {
  std::vector<tpl::InteractionTemplate> templates;
};

LoadedPackage load_package(const std::string& dir, const std::string& key_path) {
  return {rep::verify_package(template_files(dir), load_key(key_path))};
}

int exit_code_for(const rep::ReplayOutcome& out) {
  switch (out.status) {
  case rep::ReplayOutcome::OK: return kExitOk;
  case rep::ReplayOutcome::NO_TEMPLATE: return kExitOutOfCoverage;
  case rep::ReplayOutcome::DIVERGED: return kExitDiverged;
  case rep::ReplayOutcome::VERIFY_FAILED: return kExitVerifyFailed;
  case rep::ReplayOutcome::AMBIGUOUS: return kExitInternal;
  }
  return kExitInternal;
}

int cmd_replay(const std::string& dir, const std::string& entry,
               const std::vector<std::string>& kvs, const std::string& data_file,
               const std::string& fault, u64 fault_job, double fault_prob, u64 seed,
               u64 max_attempts, const std::string& key_path) {
  LoadedPackage pkg = load_package(dir, key_path);
  const rec::EntrySpec& spec = rec::find_entry(entry);

  sim::FaultPlan plan = sim::FaultPlan::none();
  if (!fault.empty()) {
    sim::FaultKind kind = sim::parse_fault_kind(fault);
    plan = fault_prob > 0.0 ? sim::FaultPlan::random(kind, fault_prob, seed)
                            : sim::FaultPlan::at_job(kind, fault_job);
  }
  auto dev = sim::make_device(spec.device, seed, plan);

  rep::Replayer rp(pkg.templates, *dev);
  rep::Invocation inv;
  inv.entry = entry;
  inv.args = parse_args(kvs);
  inv.max_attempts = max_attempts;

  bool writes_out = false;
  if (!data_file.empty()) {
    rec::PayloadDir dir_kind = spec.payload_dir(inv.args);
    if (dir_kind == rec::PayloadDir::In) {
      std::ifstream in(data_file, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read data file " + data_file);
      inv.data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else if (dir_kind == rec::PayloadDir::Out) {
      writes_out = true;
    }
  }

  rep::ReplayOutcome out = rp.run(inv);
  std::cout << rep::to_string(out) << "\n";
  if (out.status == rep::ReplayOutcome::OK && writes_out) {
    std::ofstream of(data_file, std::ios::binary);
    if (!of) throw std::runtime_error("cannot write data file " + data_file);
    of.write(reinterpret_cast<const char*>(inv.data.data()),
             static_cast<std::streamsize>(inv.data.size()));
  }
  return exit_code_for(out);
}

int cmd_coverage(const std::string& dir, const std::string& key_path) {
  LoadedPackage pkg = load_package(dir, key_path);
  std::cout << tpl::coverage_report(pkg.templates);
  return kExitOk;
}

int cmd_diff_oracle(const std::string& dir, const std::string& entry, u64 trials, u64 seed,
                    const std::string& key_path) {
  LoadedPackage pkg = load_package(dir, key_path);
  rep::OracleReport report = rep::diff_oracle(pkg.templates, entry, trials, seed);
  std::cout << "trials=" << report.trials << " mismatches=" << report.mismatches << "\n";
  if (report.mismatches) std::cout << "first mismatch: " << report.first_mismatch << "\n";
  return report.mismatches == 0 ? kExitOk : kExitInternal;
}

int cmd_verify(const std::string& dir, const std::string& key_path) {
  tpl::Key key = load_key(key_path);
  auto files = template_files(dir);
  int rc = kExitOk;
  for (const auto& f : files) {
    try {
      rep::verify_package({f}, key);
      std::cout << f << ": OK\n";
    } catch (const rep::PackageVerifyError&) {
      std::cout << f << ": VERIFY_FAILED\n";
      rc = kExitVerifyFailed;
    }
  }
  return rc;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"record-and-replay driver toolkit"};
  app.require_subcommand(1);

  std::string manifest, out_dir = "out", templates_dir = "templates", entry, data_file, fault,
              key_path;
  std::vector<std::string> kvs;
  u64 seed = 1, trials = 100, max_attempts = 3, fault_job = 0;
  double fault_prob = 0.0;

  auto add_key = [&](CLI::App* c) {
    c->add_option("--key", key_path, "MAC key file (falls back to $DRIVERLET_KEY)");
  };

  auto* rec_cmd = app.add_subcommand("record", "run a record campaign from a manifest");
  rec_cmd->add_option("--manifest", manifest, "campaign manifest file")->required();
  rec_cmd->add_option("--out", out_dir, "output directory");
  rec_cmd->add_option("--seed", seed, "campaign seed");
  add_key(rec_cmd);

  auto* rep_cmd = app.add_subcommand("replay", "replay one invocation from a template package");
  rep_cmd->add_option("--templates", templates_dir, "template package directory");
  rep_cmd->add_option("--entry", entry, "entry point name")->required();
  rep_cmd->add_option("args", kvs, "entry arguments as name=value");
  rep_cmd->add_option("--data-file", data_file, "payload file (input for writes, output for reads)");
  rep_cmd->add_option("--fault", fault, "injected fault kind");
  rep_cmd->add_option("--fault-job", fault_job, "job index the fault triggers at");
  rep_cmd->add_option("--fault-prob", fault_prob, "per-job fault probability");
  rep_cmd->add_option("--seed", seed, "device seed");
  rep_cmd->add_option("--max-attempts", max_attempts, "retry budget per invocation");
  add_key(rep_cmd);

  auto* cov_cmd = app.add_subcommand("coverage", "print cumulative input-space coverage");
  cov_cmd->add_option("--templates", templates_dir, "template package directory");
  add_key(cov_cmd);

  auto* orc_cmd = app.add_subcommand("diff-oracle", "differential gold-vs-replay check");
  orc_cmd->add_option("--templates", templates_dir, "template package directory");
  orc_cmd->add_option("--entry", entry, "entry point name")->required();
  orc_cmd->add_option("--trials", trials, "number of random in-coverage trials");
  orc_cmd->add_option("--seed", seed, "trial RNG seed");
  add_key(orc_cmd);

  auto* ver_cmd = app.add_subcommand("verify", "authenticate every template file");
  ver_cmd->add_option("--templates", templates_dir, "template package directory");
  add_key(ver_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rec_cmd->parsed()) return cmd_record(manifest, out_dir, seed, key_path);
    if (rep_cmd->parsed())
      return cmd_replay(templates_dir, entry, kvs, data_file, fault, fault_job, fault_prob, seed,
                        max_attempts, key_path);
    if (cov_cmd->parsed()) return cmd_coverage(templates_dir, key_path);
    if (orc_cmd->parsed()) return cmd_diff_oracle(templates_dir, entry, trials, seed, key_path);
    if (ver_cmd->parsed()) return cmd_verify(templates_dir, key_path);
  } catch (const rep::PackageVerifyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
