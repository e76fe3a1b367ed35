#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "macmarl/harness/oracles.hpp"
#include "macmarl/harness/trainer.hpp"

namespace fs = std::filesystem;
using namespace macmarl;
using namespace macmarl::harness;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_csv(const fs::path& path, const std::vector<MetricsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_metrics_csv(out, records);
}

int train_seed(const RunConfig& config, std::uint64_t seed, const fs::path& dir, const std::string& resume) {
  const auto start = std::chrono::steady_clock::now();
  Trainer trainer = resume.empty() ? Trainer(config, seed) : Trainer::load_file(resume);
  if (!resume.empty() && trainer.seed() != seed)
    std::cerr << "note: resuming seed " << trainer.seed() << " from checkpoint\n";
  const std::string tag = "seed" + std::to_string(trainer.seed());
  try {
    trainer.train(config.episodes);
  } catch (const neural::NumericalError& e) {
    const auto dump = dir / ("abort_" + tag + ".bin");
    trainer.save_file(dump.string());
    std::cerr << "numerical abort at episode " << trainer.episode() << ": " << e.what() << "\nstate dumped to "
              << dump << '\n';
    return kExitNumerical;
  }
  write_csv(dir / ("metrics_" + tag + ".csv"), trainer.metrics());
  write_csv(dir / ("metrics_" + tag + "_smoothed.csv"), smooth_metrics(trainer.metrics()));
  trainer.save_file((dir / ("checkpoint_" + tag + ".bin")).string());
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  std::ofstream(dir / ("timing_" + tag + ".txt")) << "wall_clock_seconds = " << elapsed.count() << '\n';
  if (!trainer.metrics().empty())
    std::cout << tag << " final return " << trainer.metrics().back().return_mean << " (" << elapsed.count()
              << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macro-action multi-agent deep Q-learning"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume;
  std::optional<std::uint64_t> seed;
  auto* train = app.add_subcommand("train", "Train one seed (or every configured seed)");
  train->add_option("--config", config_path, "Key/value run config")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Seed (defaults to every entry of `seeds`)");
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

  std::string checkpoint;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Greedy evaluation of a checkpoint");
  evaluate->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--episodes", episodes)->required();
  evaluate->add_option("--seed", eval_seed, "Evaluation stream seed");

  std::string env_id, size;
  int oracle_episodes = 200;
  std::optional<int> horizon;
  auto* oracle = app.add_subcommand("oracle", "Return of the scripted reference policy");
  oracle->add_option("--env", env_id)->required();
  oracle->add_option("--size", size, "Grid size WxH (square; ignored by warehouse)");
  oracle->add_option("--episodes", oracle_episodes, "Episodes for stochastic environments");
  oracle->add_option("--horizon", horizon);

  CLI11_PARSE(app, argc, argv);
  std::cout << std::setprecision(std::numeric_limits<double>::max_digits10);

  try {
    if (*train) {
      const RunConfig config = load_run_config(config_path);
      fs::create_directories(out_dir);
      if (!resume.empty()) return train_seed(config, seed.value_or(0), out_dir, resume);
      const std::vector<std::uint64_t> seeds = seed ? std::vector<std::uint64_t>{*seed} : config.seeds;
      for (auto s : seeds)
        if (const int code = train_seed(config, s, out_dir, ""); code != 0) return code;
      return 0;
    }
    if (*evaluate) {
      const Trainer trainer = Trainer::load_file(checkpoint);
      const auto summary = trainer.evaluate(episodes, eval_seed);
      std::cout << "mean " << summary.mean << "\nstderr " << summary.stderr_ << "\nreturns";
      for (double r : summary.returns) std::cout << ' ' << r;
      std::cout << '\n';
      return 0;
    }
    envs::EnvConfig env;
    env.env = env_id;
    if (!size.empty()) env.grid = envs::parse_grid_size(size);
    if (horizon) env.horizon = *horizon;
    const auto summary = oracle_return(env, oracle_episodes);
    std::cout << summary.mean << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const neural::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
