#include <iostream>
#include <vector>

#include "CLI11.hpp"

#include "hvtm/errors.hpp"
#include "hvtm/harness.hpp"

namespace {

using hvtm::RunConfig;

struct FlagSet {
  std::string config_path;
  RunConfig v;  // raw flag values; only flags the user passed override the config file
  bool boost_flag = false;
};

void add_flags(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (a run manifest also works)");

  cmd->add_option("--data", f.v.data_kind,
                  "data kind: xor, idx, tsv-text, tsv-fingerprint, hvcache");
  cmd->add_option("--train-images", f.v.train_images, "IDX ubyte image file (train)");
  cmd->add_option("--train-labels", f.v.train_labels, "IDX ubyte label file (train)");
  cmd->add_option("--test-images", f.v.test_images, "IDX ubyte image file (test)");
  cmd->add_option("--test-labels", f.v.test_labels, "IDX ubyte label file (test)");
  cmd->add_option("--train-path", f.v.train_path, "TSV or hvcache file (train)");
  cmd->add_option("--test-path", f.v.test_path, "TSV or hvcache file (test)");
  cmd->add_option("--fingerprint-length", f.v.fingerprint_length,
                  "fingerprint bit width for tsv-fingerprint data");
  cmd->add_option("--train-per-class", f.v.train_per_class,
                  "stratified train subset size per class (0 = all)");
  cmd->add_option("--test-per-class", f.v.test_per_class,
                  "stratified test subset size per class (0 = all)");
  cmd->add_option("--train-fraction", f.v.train_fraction, "stratified train subset fraction");
  cmd->add_option("--test-fraction", f.v.test_fraction, "stratified test subset fraction");

  cmd->add_option("--encoder", f.v.encoder, "encoder: image, text, fingerprint, vanilla");
  cmd->add_option("--hv-size", f.v.hv_size, "hypervector width D");
  cmd->add_option("--nbits", f.v.nbits, "set bits per token");
  cmd->add_option("--patch-height", f.v.patch_height, "image patch height");
  cmd->add_option("--patch-width", f.v.patch_width, "image patch width");
  cmd->add_option("--stride", f.v.stride, "image patch stride");
  cmd->add_option("--binarize-threshold", f.v.binarize_threshold,
                  "pixel > threshold reads as 1");

  cmd->add_option("--clauses", f.v.clauses, "clauses per class (even)");
  cmd->add_option("--threshold", f.v.threshold, "vote margin target T");
  cmd->add_option("--specificity", f.v.specificity, "specificity s (s=1 is the RbE regime)");
  cmd->add_flag("--boost,!--no-boost", f.boost_flag,
                "boost true positives (default: on iff specificity == 1)");
  cmd->add_option("--states", f.v.states_per_action, "automaton states per action (<= 127)");

  cmd->add_option("--epochs", f.v.epochs, "training epochs");
  cmd->add_option("--ensembles", f.v.ensembles, "independent seeded replicas");
  cmd->add_option("--seed", f.v.seed, "master seed");
  cmd->add_option("--out", f.v.out_dir, "output directory");

  cmd->add_option("--hv-sizes", f.v.hv_sizes, "sweep axis: hypervector widths");
  cmd->add_option("--nbits-list", f.v.nbits_list, "sweep axis: set-bit counts");
  cmd->add_option("--clauses-list", f.v.clauses_list, "sweep axis: clauses per class");

  cmd->add_option("--model", f.v.model_path, "model file (eval/explain)");
  cmd->add_option("--top-k", f.v.top_k, "decoded matches kept per clause (0 = no decoding)");
  cmd->add_option("--tokens", f.v.tokens, "token count for the overlap-likelihood formula");
}

RunConfig resolve(CLI::App* cmd, FlagSet& f) {
  RunConfig cfg;
  if (cmd->count("--config")) cfg = RunConfig::from_file(f.config_path);
  auto ov = [&](const char* flag, const auto& from, auto& to) {
    if (cmd->count(flag)) to = from;
  };
  ov("--data", f.v.data_kind, cfg.data_kind);
  ov("--train-images", f.v.train_images, cfg.train_images);
  ov("--train-labels", f.v.train_labels, cfg.train_labels);
  ov("--test-images", f.v.test_images, cfg.test_images);
  ov("--test-labels", f.v.test_labels, cfg.test_labels);
  ov("--train-path", f.v.train_path, cfg.train_path);
  ov("--test-path", f.v.test_path, cfg.test_path);
  ov("--fingerprint-length", f.v.fingerprint_length, cfg.fingerprint_length);
  ov("--train-per-class", f.v.train_per_class, cfg.train_per_class);
  ov("--test-per-class", f.v.test_per_class, cfg.test_per_class);
  ov("--train-fraction", f.v.train_fraction, cfg.train_fraction);
  ov("--test-fraction", f.v.test_fraction, cfg.test_fraction);
  ov("--encoder", f.v.encoder, cfg.encoder);
  ov("--hv-size", f.v.hv_size, cfg.hv_size);
  ov("--nbits", f.v.nbits, cfg.nbits);
  ov("--patch-height", f.v.patch_height, cfg.patch_height);
  ov("--patch-width", f.v.patch_width, cfg.patch_width);
  ov("--stride", f.v.stride, cfg.stride);
  ov("--binarize-threshold", f.v.binarize_threshold, cfg.binarize_threshold);
  ov("--clauses", f.v.clauses, cfg.clauses);
  ov("--threshold", f.v.threshold, cfg.threshold);
  ov("--specificity", f.v.specificity, cfg.specificity);
  ov("--states", f.v.states_per_action, cfg.states_per_action);
  ov("--epochs", f.v.epochs, cfg.epochs);
  ov("--ensembles", f.v.ensembles, cfg.ensembles);
  ov("--seed", f.v.seed, cfg.seed);
  ov("--out", f.v.out_dir, cfg.out_dir);
  ov("--hv-sizes", f.v.hv_sizes, cfg.hv_sizes);
  ov("--nbits-list", f.v.nbits_list, cfg.nbits_list);
  ov("--clauses-list", f.v.clauses_list, cfg.clauses_list);
  ov("--model", f.v.model_path, cfg.model_path);
  ov("--top-k", f.v.top_k, cfg.top_k);
  ov("--tokens", f.v.tokens, cfg.tokens);
  if (cmd->count("--boost") || cmd->count("--no-boost")) cfg.boost = f.boost_flag ? 1 : 0;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypervector Tsetlin Machine workbench"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* desc;
    int (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"train", "train ensemble replicas; write curves and best models", hvtm::run_train},
      {"eval", "evaluate a saved model; print metrics JSON", hvtm::run_eval},
      {"sweep", "grid sweep over hv_size x nbits x clauses; write CSVs", hvtm::run_sweep},
      {"explain", "export and decode clauses from a saved model", hvtm::run_explain},
      {"encode", "encode a dataset into an hvcache file", hvtm::run_encode},
      {"info", "print capacity and overlap likelihood for D, NBits, tokens", hvtm::run_info},
  };

  std::vector<FlagSet> flags(std::size(commands));
  std::vector<CLI::App*> cmds;
  for (size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* cmd = app.add_subcommand(commands[i].name, commands[i].desc);
    add_flags(cmd, flags[i]);
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (size_t i = 0; i < std::size(commands); ++i)
      if (cmds[i]->parsed()) return commands[i].run(resolve(cmds[i], flags[i]));
    std::cerr << "no command selected\n";
    return 2;
  } catch (const hvtm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hvtm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
