#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include "reloc/dataset.hpp"
#include "reloc/embedding_graph.hpp"
#include "reloc/encoder.hpp"
#include "reloc/error.hpp"
#include "reloc/evaluation.hpp"
#include "reloc/g2o_io.hpp"
#include "reloc/gnn.hpp"
#include "reloc/gnn_training.hpp"
#include "reloc/parallel.hpp"
#include "reloc/pose_graph.hpp"
#include "reloc/query.hpp"
#include "reloc/scene.hpp"
#include "reloc/similarity.hpp"

namespace reloc::cli {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, fmt::format("missing input {}", path.string()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses, const char* step) {
  std::string text = fmt::format("{},loss\n", step);
  for (std::size_t k = 0; k < losses.size(); ++k) text += fmt::format("{},{:.17g}\n", k, losses[k]);
  write_text(path, text);
}

Dataset load_checked(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, fmt::format("dataset directory {} does not exist", dir.string()));
  }
  return load_dataset(dir);
}

std::vector<EmbeddingCode> load_codes(const fs::path& path, std::size_t expected) {
  require_file(path);
  auto codes = read_embeddings_csv(path);
  if (codes.size() != expected) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} has {} embeddings but the dataset has {} keyframes",
                            path.string(), codes.size(), expected));
  }
  return codes;
}

SimilarityMatrix load_similarity(const fs::path& path, std::size_t expected) {
  require_file(path);
  auto sim = read_similarity_csv(path);
  if (static_cast<std::size_t>(sim.n) != expected) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("{} is {}x{} but the dataset has {} keyframes", path.string(), sim.n,
                            sim.n, expected));
  }
  return sim;
}

std::vector<int> members_or_throw(const Dataset& d, int loop) {
  auto m = d.loop_members(loop);
  if (m.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("loop {} has no keyframes (dataset has {} loops)", loop, d.loop_count()));
  }
  return m;
}

Eigen::MatrixXd rows_of(const std::vector<EmbeddingCode>& codes, const std::vector<int>& ids) {
  std::vector<EmbeddingCode> picked;
  for (int id : ids) picked.push_back(codes[id]);
  return stack_codes(picked);
}

EmbeddingGraph chain_graph(const std::vector<EmbeddingCode>& codes, const std::vector<int>& ids) {
  const auto edges = chain_edges(static_cast<int>(ids.size()));
  return build_embedding_graph(rows_of(codes, ids), edges);
}

SimilarityMatrix predicted_matrix(const std::vector<EmbeddingCode>& codes) {
  const int n = static_cast<int>(codes.size());
  SimilarityMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = predicted_similarity(codes[i], codes[j]);
  return m;
}

Trajectory with_timestamps(const Trajectory& like, const std::vector<Pose>& poses) {
  Trajectory t;
  for (std::size_t k = 0; k < poses.size(); ++k) t.push_back({like[k].timestamp, poses[k]});
  return t;
}

}  // namespace

void cmd_gen(const GenArgs& args, std::ostream& log) {
  const SceneSpec spec = args.spec ? load_scene_spec(*args.spec) : SceneSpec{};
  const auto scene = generate_scene(spec, args.seed);
  const auto dataset = build_dataset(scene, resolve_thread_count(args.threads));
  ensure_dir(args.out);
  save_dataset(args.out, dataset);
  fmt::print(log, "gen: {} keyframes in {} loops -> {}\n", dataset.size(), dataset.loop_count(),
             args.out.string());
}

void cmd_iou(const IouArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  IouOptions opt;
  opt.occlusion = args.occlusion;
  opt.occlusion_eps = args.occlusion_eps;
  opt.threads = resolve_thread_count(args.threads);
  const auto gt = d.ground_truth();
  const auto sim = build_similarity_matrix(std::span<const Keyframe>(d.keyframes), gt,
                                           d.intrinsics, opt);
  ensure_dir(args.out);
  write_similarity_csv(args.out / "similarity.csv", sim);
  write_similarity_pgm(args.out / "similarity.pgm", sim);
  fmt::print(log, "iou: {}x{} similarity matrix -> {}\n", sim.n, sim.n, args.out.string());
}

void cmd_train_encoder(const TrainEncoderArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  const auto sim = load_similarity(args.similarity, d.size());
  EncoderTrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.learning_rate = args.learning_rate;
  cfg.momentum = args.momentum;
  cfg.weight_decay = args.weight_decay;
  cfg.batch_size = args.batch_size;
  cfg.hidden = args.hidden;
  cfg.dim = args.dim;
  cfg.seed = args.seed;
  cfg.threads = resolve_thread_count(args.threads);
  const auto result =
      train_encoder(d.keyframes, d.intrinsics.width, d.intrinsics.height, sim, cfg);
  ensure_dir(args.out);
  save_encoder(args.out / "encoder.s3ep", result.params);
  write_loss_csv(args.out / "loss.csv", result.loss_history, "epoch");
  fmt::print(log, "train-encoder: {} epochs, loss {:.6g} -> {:.6g}\n", args.epochs,
             result.loss_history.empty() ? 0.0 : result.loss_history.front(),
             result.loss_history.empty() ? 0.0 : result.loss_history.back());
}

void cmd_embed(const EmbedArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  require_file(args.encoder);
  const auto params = load_encoder(args.encoder);
  std::vector<EmbeddingCode> codes(d.size());
  parallel_for(d.size(), resolve_thread_count(args.threads), [&](std::size_t k) {
    codes[k] = encode(params, d.keyframes[k].patches, d.intrinsics.width, d.intrinsics.height);
  });
  ensure_dir(args.out);
  write_embeddings_csv(args.out / "embeddings.csv", codes);
  fmt::print(log, "embed: {} codes of dim {} -> {}\n", codes.size(), params.dim,
             args.out.string());
}

void cmd_train_gnn(const TrainGnnArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  const auto codes = load_codes(args.embeddings, d.size());
  const auto sim = load_similarity(args.similarity, d.size());
  const auto ref = members_or_throw(d, args.reference_loop);
  const auto qry = members_or_throw(d, args.query_loop);
  if (args.reference_loop == args.query_loop) {
    throw Error(ErrorCode::InvalidArgument, "reference and query loops must differ");
  }
  Eigen::MatrixXd labels(static_cast<Eigen::Index>(qry.size()),
                         static_cast<Eigen::Index>(ref.size()));
  for (std::size_t i = 0; i < qry.size(); ++i)
    for (std::size_t j = 0; j < ref.size(); ++j) labels(i, j) = sim.at(qry[i], ref[j]);

  const int dim = static_cast<int>(codes.front().size());
  const auto initial = GnnParams::initialize(args.seed, dim);
  GnnTrainConfig cfg;
  cfg.steps = args.steps;
  cfg.learning_rate = args.learning_rate;
  cfg.momentum = args.momentum;
  cfg.weight_decay = args.weight_decay;
  cfg.eta = args.eta;
  const auto result =
      train_gnn(initial, chain_graph(codes, ref), chain_graph(codes, qry), labels, cfg);
  ensure_dir(args.out);
  save_gnn(args.out / "gnn.s3eg", result.params);
  write_loss_csv(args.out / "loss.csv", result.loss_history, "step");
  fmt::print(log, "train-gnn: {} steps, loss {:.6g} -> {:.6g}\n", args.steps,
             result.loss_history.front(), result.loss_history.back());
}

void cmd_query(const QueryArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  const auto codes = load_codes(args.embeddings, d.size());
  require_file(args.gnn);
  const auto params = load_gnn(args.gnn);
  const auto ref = members_or_throw(d, args.reference_loop);
  const ReferenceGraph reference = gnn_forward(params, chain_graph(codes, ref));

  QueryOptions opt;
  opt.eta = args.eta;
  opt.threshold = args.threshold;
  opt.percentile = args.percentile;

  // Best match per query keyframe over all windows that contain it.
  std::map<int, Match> best;
  for (int loop = 0; loop < d.loop_count(); ++loop) {
    if (loop == args.reference_loop) continue;
    const auto members = d.loop_members(loop);
    const int n = static_cast<int>(members.size());
    if (n == 0) continue;
    const int w = std::min(args.window, n);
    std::vector<int> starts;
    for (int s = 0; s + w <= n; s += w) starts.push_back(s);
    if (starts.back() + w < n) starts.push_back(n - w);
    for (int s : starts) {
      const std::vector<int> ids(members.begin() + s, members.begin() + s + w);
      const auto result = query_subgraph(params, reference, rows_of(codes, ids), opt);
      for (const auto& m : result.matches) {
        const Match global{ids[m.query], ref[m.reference], m.score};
        auto it = best.find(global.query);
        if (it == best.end() || global.score > it->second.score) best[global.query] = global;
      }
    }
  }
  std::vector<Match> matches;
  for (const auto& [id, m] : best) matches.push_back(m);
  std::stable_sort(matches.begin(), matches.end(),
                   [](const Match& a, const Match& b) { return a.score > b.score; });
  ensure_dir(args.out);
  write_matches_csv(args.out / "matches.csv", matches);
  fmt::print(log, "query: {} loop-closure candidates -> {}\n", matches.size(), args.out.string());
}

void cmd_optimize(const OptimizeArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  if (d.odometry.size() != d.size()) {
    throw Error(ErrorCode::LengthMismatch, "dataset has no odometry trajectory for every keyframe");
  }
  const auto codes = load_codes(args.embeddings, d.size());
  require_file(args.matches);
  const auto matches = read_matches_csv(args.matches);
  std::vector<double> theta;
  for (const auto& m : matches) {
    if (m.query < 0 || m.reference < 0 || static_cast<std::size_t>(m.query) >= d.size() ||
        static_cast<std::size_t>(m.reference) >= d.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  fmt::format("match ({}, {}) outside the dataset", m.query, m.reference));
    }
    theta.push_back(predicted_similarity(codes[m.query], codes[m.reference]));
  }
  const auto initial = poses_of(d.odometry);
  const auto gt = d.ground_truth();
  const auto odo = odometry_edges(initial);
  const auto problem = build_problem_from_matches(initial, odo, matches, theta, gt);
  OptConfig cfg;
  cfg.max_iters = args.max_iters;
  cfg.tol = args.tol;
  cfg.threads = resolve_thread_count(args.threads);
  const auto result = optimize(problem, cfg);

  ensure_dir(args.out);
  write_g2o(args.out / "problem.g2o", problem);
  write_tum(args.out / "optimized.txt", with_timestamps(d.odometry, result.poses));
  const auto& r = result.report;
  std::string text = fmt::format(
      "poses {}\nodometry_edges {}\nloop_edges {}\niterations {}\ninitial_cost {:.17g}\n"
      "final_cost {:.17g}\ntermination {}\n",
      problem.poses.size(), odo.size(), matches.size(), r.iterations, r.initial_cost,
      r.final_cost, to_string(r.termination));
  text += "cost_history";
  for (double c : r.cost_history) text += fmt::format(" {:.17g}", c);
  text += '\n';
  write_text(args.out / "report.txt", text);
  fmt::print(log, "optimize: {} loop edges, cost {:.6g} -> {:.6g} ({})\n", matches.size(),
             r.initial_cost, r.final_cost, to_string(r.termination));
}

void cmd_eval(const EvalArgs& args, std::ostream& log) {
  const auto d = load_checked(args.data);
  require_file(args.trajectory);
  const auto estimated = read_tum(args.trajectory);
  const auto optimized = evaluate_ate(estimated, d.poses, true);
  ensure_dir(args.out);
  write_ate_report(args.out / "ate_optimized.txt", optimized);

  std::string summary = fmt::format("optimized_rmse {:.9g}\n", optimized.rmse);
  std::string errors = "frame,optimized";
  std::optional<AteReport> odometry;
  if (d.odometry.size() == d.size()) {
    odometry = evaluate_ate(d.odometry, d.poses, true);
    write_ate_report(args.out / "ate_odometry.txt", *odometry);
    summary += fmt::format("odometry_rmse {:.9g}\nimproved {}\n", odometry->rmse,
                           optimized.rmse < odometry->rmse ? "yes" : "no");
    errors += ",odometry";
  }
  errors += '\n';
  for (std::size_t k = 0; k < optimized.errors.size(); ++k) {
    errors += fmt::format("{},{:.9g}", k, optimized.errors[k]);
    if (odometry) errors += fmt::format(",{:.9g}", odometry->errors[k]);
    errors += '\n';
  }
  write_text(args.out / "errors.csv", errors);

  if (args.similarity && args.embeddings) {
    const auto truth = load_similarity(*args.similarity, d.size());
    const auto codes = load_codes(*args.embeddings, d.size());
    const auto pred = predicted_matrix(codes);
    const auto heat = heatmap_error(pred, truth);
    write_similarity_csv(args.out / "predicted_similarity.csv", pred);
    write_similarity_pgm(args.out / "heatmap_error.pgm", heat.error);
    summary += fmt::format("heatmap_max_abs_error {:.9g}\n", heat.max_abs_error);
  }
  write_text(args.out / "summary.txt", summary);
  fmt::print(log, "eval:\n{}", summary);
}

void cmd_pipeline(const PipelineArgs& args, std::ostream& log) {
  const fs::path data = args.out / "data";
  const fs::path iou = args.out / "iou";
  const fs::path encoder = args.out / "encoder";
  const fs::path embed = args.out / "embed";
  const fs::path gnn = args.out / "gnn";
  const fs::path query = args.out / "query";
  const fs::path opt = args.out / "optimize";
  const fs::path eval = args.out / "eval";

  cmd_gen({data, args.spec, args.seed, args.threads}, log);
  IouArgs ia;
  ia.data = data;
  ia.out = iou;
  ia.threads = args.threads;
  cmd_iou(ia, log);
  TrainEncoderArgs te;
  te.data = data;
  te.similarity = iou / "similarity.csv";
  te.out = encoder;
  te.epochs = args.epochs;
  te.learning_rate = args.encoder_learning_rate;
  te.seed = args.seed;
  te.threads = args.threads;
  cmd_train_encoder(te, log);
  cmd_embed({data, encoder / "encoder.s3ep", embed, args.threads}, log);
  TrainGnnArgs tg;
  tg.data = data;
  tg.embeddings = embed / "embeddings.csv";
  tg.similarity = iou / "similarity.csv";
  tg.out = gnn;
  tg.steps = args.gnn_steps;
  tg.learning_rate = args.gnn_learning_rate;
  tg.seed = args.seed;
  cmd_train_gnn(tg, log);
  QueryArgs qa;
  qa.data = data;
  qa.embeddings = embed / "embeddings.csv";
  qa.gnn = gnn / "gnn.s3eg";
  qa.out = query;
  qa.window = args.window;
  cmd_query(qa, log);
  OptimizeArgs oa;
  oa.data = data;
  oa.matches = query / "matches.csv";
  oa.embeddings = embed / "embeddings.csv";
  oa.out = opt;
  oa.threads = args.threads;
  cmd_optimize(oa, log);
  EvalArgs ea;
  ea.data = data;
  ea.trajectory = opt / "optimized.txt";
  ea.out = eval;
  ea.similarity = iou / "similarity.csv";
  ea.embeddings = embed / "embeddings.csv";
  cmd_eval(ea, log);
}

namespace {

int exit_code_for(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Io: return kExitIo;
    case ErrorCategory::Validation: return kExitValidation;
    case ErrorCategory::Numeric: return kExitNumeric;
  }
  return kExitIo;
}

void add_threads(CLI::App* app, int& threads) {
  app->add_option("--threads", threads, "Worker threads (0: RELOC_KIT_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relocalization toolkit: synthetic scenes, similarity learning, graph query, "
               "pose-graph optimization",
               "reloc-kit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::string stage;
  std::function<void()> action;

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Render a synthetic dataset");
  c_gen->add_option("--out", gen.out, "Output dataset directory")->required();
  c_gen->add_option("--spec", gen.spec, "Scene spec (JSON)")->check(CLI::ExistingFile);
  c_gen->add_option("--seed", gen.seed, "Random seed");
  add_threads(c_gen, gen.threads);
  c_gen->callback([&] { stage = "gen"; action = [&] { cmd_gen(gen, out); }; });

  IouArgs iou;
  bool no_occlusion = false;
  auto* c_iou = app.add_subcommand("iou", "Ground-truth reprojection IoU matrix");
  c_iou->add_option("--data", iou.data, "Dataset directory")->required();
  c_iou->add_option("--out", iou.out, "Output directory")->required();
  c_iou->add_flag("--no-occlusion", no_occlusion, "Disable the z-buffer test");
  c_iou->add_option("--occlusion-eps", iou.occlusion_eps, "Occlusion tolerance in meters")
      ->check(CLI::NonNegativeNumber);
  add_threads(c_iou, iou.threads);
  c_iou->callback([&] {
    stage = "iou";
    iou.occlusion = !no_occlusion;
    action = [&] { cmd_iou(iou, out); };
  });

  TrainEncoderArgs te;
  auto* c_te = app.add_subcommand("train-encoder", "Train the patch embedding encoder");
  c_te->add_option("--data", te.data, "Dataset directory")->required();
  c_te->add_option("--similarity", te.similarity, "similarity.csv from iou")->required();
  c_te->add_option("--out", te.out, "Output directory")->required();
  c_te->add_option("--epochs", te.epochs)->check(CLI::NonNegativeNumber);
  c_te->add_option("--lr", te.learning_rate)->check(CLI::PositiveNumber);
  c_te->add_option("--momentum", te.momentum)->check(CLI::Range(0.0, 1.0));
  c_te->add_option("--weight-decay", te.weight_decay)->check(CLI::NonNegativeNumber);
  c_te->add_option("--batch", te.batch_size, "Pairs per step")->check(CLI::PositiveNumber);
  c_te->add_option("--hidden", te.hidden)->check(CLI::PositiveNumber);
  c_te->add_option("--dim", te.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  c_te->add_option("--seed", te.seed);
  add_threads(c_te, te.threads);
  c_te->callback([&] { stage = "train-encoder"; action = [&] { cmd_train_encoder(te, out); }; });

  EmbedArgs em;
  auto* c_em = app.add_subcommand("embed", "Encode every keyframe");
  c_em->add_option("--data", em.data, "Dataset directory")->required();
  c_em->add_option("--encoder", em.encoder, "encoder.s3ep")->required();
  c_em->add_option("--out", em.out, "Output directory")->required();
  add_threads(c_em, em.threads);
  c_em->callback([&] { stage = "embed"; action = [&] { cmd_embed(em, out); }; });

  TrainGnnArgs tg;
  auto* c_tg = app.add_subcommand("train-gnn", "Train the graph query network");
  c_tg->add_option("--data", tg.data, "Dataset directory")->required();
  c_tg->add_option("--embeddings", tg.embeddings, "embeddings.csv")->required();
  c_tg->add_option("--similarity", tg.similarity, "similarity.csv")->required();
  c_tg->add_option("--out", tg.out, "Output directory")->required();
  c_tg->add_option("--steps", tg.steps)->check(CLI::NonNegativeNumber);
  c_tg->add_option("--lr", tg.learning_rate)->check(CLI::PositiveNumber);
  c_tg->add_option("--momentum", tg.momentum)->check(CLI::Range(0.0, 1.0));
  c_tg->add_option("--weight-decay", tg.weight_decay)->check(CLI::NonNegativeNumber);
  c_tg->add_option("--eta", tg.eta)->check(CLI::PositiveNumber);
  c_tg->add_option("--reference-loop", tg.reference_loop)->check(CLI::NonNegativeNumber);
  c_tg->add_option("--query-loop", tg.query_loop)->check(CLI::NonNegativeNumber);
  c_tg->add_option("--seed", tg.seed);
  c_tg->callback([&] { stage = "train-gnn"; action = [&] { cmd_train_gnn(tg, out); }; });

  QueryArgs qa;
  auto* c_q = app.add_subcommand("query", "Detect loop closures by sub-graph query");
  c_q->add_option("--data", qa.data, "Dataset directory")->required();
  c_q->add_option("--embeddings", qa.embeddings, "embeddings.csv")->required();
  c_q->add_option("--gnn", qa.gnn, "gnn.s3eg")->required();
  c_q->add_option("--out", qa.out, "Output directory")->required();
  c_q->add_option("--window", qa.window, "Query sub-graph length")->check(CLI::PositiveNumber);
  c_q->add_option("--eta", qa.eta)->check(CLI::PositiveNumber);
  c_q->add_option("--threshold", qa.threshold, "Absolute score threshold");
  c_q->add_option("--percentile", qa.percentile, "Score percentile threshold")
      ->check(CLI::Range(0.0, 1.0));
  c_q->add_option("--reference-loop", qa.reference_loop)->check(CLI::NonNegativeNumber);
  c_q->callback([&] { stage = "query"; action = [&] { cmd_query(qa, out); }; });

  OptimizeArgs oa;
  auto* c_o = app.add_subcommand("optimize", "Pose-graph optimization with loop closures");
  c_o->add_option("--data", oa.data, "Dataset directory")->required();
  c_o->add_option("--matches", oa.matches, "matches.csv")->required();
  c_o->add_option("--embeddings", oa.embeddings, "embeddings.csv")->required();
  c_o->add_option("--out", oa.out, "Output directory")->required();
  c_o->add_option("--max-iters", oa.max_iters)->check(CLI::NonNegativeNumber);
  c_o->add_option("--tol", oa.tol)->check(CLI::NonNegativeNumber);
  add_threads(c_o, oa.threads);
  c_o->callback([&] { stage = "optimize"; action = [&] { cmd_optimize(oa, out); }; });

  EvalArgs ea;
  auto* c_e = app.add_subcommand("eval", "Trajectory and heatmap evaluation");
  c_e->add_option("--data", ea.data, "Dataset directory")->required();
  c_e->add_option("--trajectory", ea.trajectory, "Estimated TUM trajectory")->required();
  c_e->add_option("--out", ea.out, "Output directory")->required();
  c_e->add_option("--similarity", ea.similarity, "Ground-truth similarity.csv");
  c_e->add_option("--embeddings", ea.embeddings, "embeddings.csv for the predicted heatmap");
  c_e->callback([&] { stage = "eval"; action = [&] { cmd_eval(ea, out); }; });

  PipelineArgs pa;
  auto* c_p = app.add_subcommand("pipeline", "Run every stage into subdirectories of --out");
  c_p->add_option("--out", pa.out, "Output directory")->required();
  c_p->add_option("--spec", pa.spec, "Scene spec (JSON)")->check(CLI::ExistingFile);
  c_p->add_option("--seed", pa.seed);
  c_p->add_option("--epochs", pa.epochs)->check(CLI::NonNegativeNumber);
  c_p->add_option("--encoder-lr", pa.encoder_learning_rate)->check(CLI::PositiveNumber);
  c_p->add_option("--gnn-steps", pa.gnn_steps)->check(CLI::NonNegativeNumber);
  c_p->add_option("--gnn-lr", pa.gnn_learning_rate)->check(CLI::PositiveNumber);
  c_p->add_option("--window", pa.window)->check(CLI::PositiveNumber);
  add_threads(c_p, pa.threads);
  c_p->callback([&] { stage = "pipeline"; action = [&] { cmd_pipeline(pa, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // help() shows the selected subcommand's help when one was parsed.
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "reloc-kit: " << e.what() << '\n';
    return kExitValidation;
  }

  if (!action) {
    err << "reloc-kit: no subcommand given\n";
    return kExitValidation;
  }
  try {
    action();
  } catch (const Error& e) {
    err << "reloc-kit " << stage << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "reloc-kit " << stage << ": " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace reloc::cli
