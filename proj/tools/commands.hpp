#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reloc::cli {

namespace fs = std::filesystem;

/// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

struct GenArgs {
  fs::path out;
  std::optional<fs::path> spec;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct IouArgs {
  fs::path data;
  fs::path out;
  bool occlusion = true;
  double occlusion_eps = 0.01;
  int threads = 0;
};

struct TrainEncoderArgs {
  fs::path data;
  fs::path similarity;
  fs::path out;
  int epochs = 40;
  double learning_rate = 1e-3;
  double momentum = 0.95;
  double weight_decay = 1e-5;
  int batch_size = 256;
  int hidden = 32;
  int dim = 16;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct EmbedArgs {
  fs::path data;
  fs::path encoder;
  fs::path out;
  int threads = 0;
};

struct TrainGnnArgs {
  fs::path data;
  fs::path embeddings;
  fs::path similarity;
  fs::path out;
  int steps = 200;
  double learning_rate = 1e-5;
  double momentum = 0.95;
  double weight_decay = 1e-5;
  double eta = 1e-3;
  int reference_loop = 0;
  int query_loop = 1;
  std::uint64_t seed = 1;
};

struct QueryArgs {
  fs::path data;
  fs::path embeddings;
  fs::path gnn;
  fs::path out;
  int window = 5;
  double eta = 1e-3;
  std::optional<double> threshold;
  double percentile = 0.9;
  int reference_loop = 0;
};

struct OptimizeArgs {
  fs::path data;
  fs::path matches;
  fs::path embeddings;
  fs::path out;
  int max_iters = 100;
  double tol = 1e-12;
  int threads = 0;
};

struct EvalArgs {
  fs::path data;
  fs::path trajectory;
  fs::path out;
  std::optional<fs::path> similarity;
  std::optional<fs::path> embeddings;
};

struct PipelineArgs {
  fs::path out;
  std::optional<fs::path> spec;
  std::uint64_t seed = 1;
  int threads = 0;
  int epochs = 40;
  double encoder_learning_rate = 1e-3;
  int gnn_steps = 200;
  double gnn_learning_rate = 1e-5;
  int window = 5;
};

/// Each stage throws reloc::Error on failure and prints a short summary to `log`.
void cmd_gen(const GenArgs& args, std::ostream& log);
void cmd_iou(const IouArgs& args, std::ostream& log);
void cmd_train_encoder(const TrainEncoderArgs& args, std::ostream& log);
void cmd_embed(const EmbedArgs& args, std::ostream& log);
void cmd_train_gnn(const TrainGnnArgs& args, std::ostream& log);
void cmd_query(const QueryArgs& args, std::ostream& log);
void cmd_optimize(const OptimizeArgs& args, std::ostream& log);
void cmd_eval(const EvalArgs& args, std::ostream& log);
void cmd_pipeline(const PipelineArgs& args, std::ostream& log);

/// Parses `args` (without the program name), runs the subcommand and maps
/// errors to exit statuses. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reloc::cli
