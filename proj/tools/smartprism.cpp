// smartprism: simulate, fuse, calibrate and evaluate tilt-compensated
// total-station measurements.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include "smartprism/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <iostream>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::uint32_t parse_can_id(const std::string& text) {
  std::string_view s = text;
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  std::uint32_t id = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), id, 16);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || id > smartprism::kCanIdMask)
    throw CLI::ValidationError("--can-base-id", "expected a 29-bit hex identifier");
  return id;
}

smartprism::Vec3 parse_reference(const std::string& text) {
  using smartprism::detail::parse_number;
  const auto parts = smartprism::detail::split_fields(text);
  if (parts.size() != 3) throw CLI::ValidationError("--reference", "expected x,y,z in meters");
  try {
    return {parse_number(parts[0], "x", 0), parse_number(parts[1], "y", 0),
            parse_number(parts[2], "z", 0)};
  } catch (const smartprism::ParseError& e) {
    throw CLI::ValidationError("--reference", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tilt compensation toolkit for IMU-augmented total-station prisms"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Generate imu.txt, rts.txt and truth.csv from a scenario config");
  simulate->add_option("-c,--config", sim_config, "Scenario config (key = value)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();
  simulate->add_option("--seed", sim_seed, "Override the config's seed");

  // fuse
  smartprism::FuseOptions fuse_opt;
  std::string fuse_imu, fuse_rts, fuse_out, fuse_config, fuse_helmert, fuse_can, fuse_can_id;
  auto* fuse = app.add_subcommand("fuse", "Fuse IMU and RTS streams into tilt-compensated POI records");
  fuse->add_option("--imu", fuse_imu, "IMU text stream")->required();
  fuse->add_option("--rts", fuse_rts, "RTS text stream")->required();
  fuse->add_option("-c,--config", fuse_config, "Fusion config (lever arms, filter, pipeline, helmert keys)");
  auto* helmert_opt = fuse->add_option("--helmert", fuse_helmert, "Helmert parameter file (from helmert-fit)");
  fuse->add_flag("--identity-helmert", fuse_opt.identity_helmert, "Treat the RTS frame as the navigation frame")
      ->excludes(helmert_opt);
  fuse->add_option("-o,--out", fuse_out, "Fused CSV output")->required();
  fuse->add_option("--can-dump", fuse_can, "Also write CAN frames, one 'id#payloadhex' per line");
  fuse->add_option("--can-base-id", fuse_can_id, "29-bit base identifier in hex (default 18FEF000)");
  fuse->add_flag("--can-attitude", fuse_opt.can_attitude, "Emit the optional attitude frame (base id + 3)");

  // helmert-fit
  std::string fit_pairs, fit_out;
  auto* fit = app.add_subcommand("helmert-fit", "Fit a 3D similarity transform to point pairs");
  fit->add_option("--pairs", fit_pairs, "CSV with sx,sy,sz,tx,ty,tz rows")->required();
  fit->add_option("-o,--out", fit_out, "Parameter file to write")->required();

  // eval
  std::vector<std::string> eval_fused;
  std::string eval_truth, eval_reference, eval_stats, eval_reconstruct;
  auto* eval = app.add_subcommand("eval", "Error statistics of fused POI records");
  auto* fused_opt = eval->add_option("--fused", eval_fused, "Fused CSV (repeatable; one report row each)");
  auto* truth_opt = eval->add_option("--truth", eval_truth, "Truth CSV from simulate");
  auto* ref_opt = eval->add_option("--reference", eval_reference, "Fixed reference point x,y,z in meters");
  eval->add_option("--stats-out", eval_stats, "Write stats CSV");
  auto* recon_opt = eval->add_option("--reconstruct", eval_reconstruct,
                                     "Check RMSE_3D against means/stds/n of each row of a stats CSV");
  truth_opt->excludes(ref_opt);
  recon_opt->excludes(fused_opt)->excludes(truth_opt)->excludes(ref_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) {
      const auto res = smartprism::run_simulate(sim_config, sim_out, sim_seed);
      fmt::print("wrote {} IMU samples, {} RTS observations, {} truth rows to {}\n", res.imu_lines,
                 res.rts_lines, res.truth_lines, sim_out);
    } else if (*fuse) {
      fuse_opt.imu_path = fuse_imu;
      fuse_opt.rts_path = fuse_rts;
      fuse_opt.out_csv = fuse_out;
      if (!fuse_config.empty()) fuse_opt.config_path = fuse_config;
      if (!fuse_helmert.empty()) fuse_opt.helmert_path = fuse_helmert;
      if (!fuse_can.empty()) fuse_opt.can_dump_path = fuse_can;
      if (!fuse_can_id.empty()) fuse_opt.can_base_id = parse_can_id(fuse_can_id);
      const auto records = smartprism::run_fuse(fuse_opt);
      fmt::print("wrote {} fused records to {}\n", records.size(), fuse_out);
    } else if (*fit) {
      const auto res = smartprism::run_helmert_fit(fit_pairs, fit_out);
      fmt::print("scale {:.12f}, fit rms residual {:.6e} m\n", res.params.scale, res.rms_residual);
    } else if (*eval) {
      if (!eval_reconstruct.empty()) {
        auto in = smartprism::detail::open_input(eval_reconstruct);
        const auto rows = smartprism::read_stats_csv(in);
        const auto checks = smartprism::reconstruct_rows(rows, std::cout);
        for (const auto& c : checks)
          if (!c.ok) {
            fmt::print(stderr, "error: row {} does not reconstruct within {} mm\n", c.label,
                       smartprism::kReconstructionTolerance);
            return kExitData;
          }
        return 0;
      }
      if (eval_fused.empty() || (eval_truth.empty() == eval_reference.empty())) {
        fmt::print(stderr, "error: eval needs --fused and exactly one of --truth / --reference\n");
        return kExitUsage;
      }
      smartprism::EvalOptions opt;
      for (const auto& f : eval_fused) opt.fused_paths.emplace_back(f);
      if (!eval_truth.empty()) opt.truth_path = eval_truth;
      if (!eval_reference.empty()) opt.reference = parse_reference(eval_reference);
      if (!eval_stats.empty()) opt.stats_out = eval_stats;
      smartprism::run_eval(opt, std::cout);
    }
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
  return 0;
}
