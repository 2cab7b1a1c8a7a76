#pragma once
// JSON experiment configuration.  Versioned schema, unknown keys rejected,
// every parameter a module consumes is settable here.
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmarket/pilotwave.hpp"
#include "qmarket/reservoir_generated.hpp"
#include "qmarket/reservoir_info.hpp"
#include "qmarket/types.hpp"

namespace qmarket {

enum class ModelKind { model1, model2, model3, pilotwave };

struct TimeGrid {
  double t_max = 20.0;
  int n_samples = 2000;
};

struct Model1Trader {
  TraderParams params;
  MarketInit init;
};

struct Model2Trader {
  ReservoirSpecII spec;
  MarketInit init;  // loi stays 0; the information lives in the bath
};

struct Model3Trader {
  ReservoirSpecIII spec;
  MarketInit init;
};

// Oracle-check settings; zeros mean "use the model's default".
struct OracleSettings {
  double k_min = 0.0;
  double k_max = 0.0;
  int n_k = 0;
  double t_check = 0.0;
  double tolerance = 0.0;
  double leakage_max = 1e-3;
  int n_times = 50;       // model1: comparison times
  double max_total = 8;   // model1: largest sector the exact evolution accepts
};

struct PilotwaveSetup {
  Grid2D grid;
  double sigma = 1.0;
  double center1 = 0.0;
  double center2 = 0.0;
  double hbar = 1.0;
  double mass = 1.0;
  double r_floor_rel = 1e-6;
  std::array<double, 2> pi0{0.0, 0.0};
  std::array<double, 2> path{0.0, 0.0};
  bool harmonic = false;  // optional hard potential 0.5 k (q - c)^2 per axis
  double k1 = 0.0, k2 = 0.0, vc1 = 0.0, vc2 = 0.0;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::model1;
  TimeGrid time;
  std::vector<Model1Trader> traders1;
  std::vector<Model2Trader> traders2;
  std::vector<Model3Trader> traders3;
  bool with_bath_term = true;  // model3: keep the reservoir-seeded integrals
  PilotwaveSetup pilot;
  std::optional<OracleSettings> oracle;
  std::string csv_prefix;
  std::string svg_path;
  std::string report_path;
  std::string fields_prefix;

  int n_traders() const {
    switch (model) {
      case ModelKind::model1: return static_cast<int>(traders1.size());
      case ModelKind::model2: return static_cast<int>(traders2.size());
      case ModelKind::model3: return static_cast<int>(traders3.size());
      default: return 0;
    }
  }
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct SweepParam {
  std::string pointer;  // JSON pointer into the config document
  double min = 0.0;
  double max = 0.0;
  int steps = 0;
};

enum class SweepObjective { delta_pi, amplitude, dominant_frequency, ordering };

struct SweepSpec {
  std::vector<SweepParam> params;  // up to two
  SweepObjective objective = SweepObjective::delta_pi;
  std::string csv_path;
};

SweepSpec parse_sweep(const std::string& json_text);
SweepSpec load_sweep(const std::string& path);

// Re-parses the config with numeric overrides applied at the given pointers;
// unknown or non-numeric targets are config errors.
ExperimentConfig apply_overrides(const std::string& json_text,
                                 const std::vector<std::pair<std::string, double>>& overrides);

std::string read_text_file(const std::string& path);

}  // namespace qmarket
