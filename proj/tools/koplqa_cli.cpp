// koplqa command line: KB loading, program execution, question answering,
// augmentation, evaluation, dataset splitting, HTTP service and a REPL.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "koplqa/augment.hpp"
#include "koplqa/evalkit.hpp"
#include "koplqa/linker.hpp"
#include "koplqa/service.hpp"

using namespace koplqa;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_counts(const KnowledgeBase& kb) {
  KbStats s = kb.stats();
  std::cout << "#Entities   " << s.entities << "\n"
            << "#Relations  " << s.relations << "\n"
            << "#Concepts   " << s.concepts << "\n"
            << "#Attributes " << s.attribute_keys << "\n";
}

void print_decisions(const std::vector<LinkDecision>& decisions) {
  for (const auto& d : decisions) {
    std::cout << "  call " << d.call_index << " slot " << d.slot_index << " ["
              << candidate_kind_name(d.chosen.kind) << "] -> " << d.chosen.label
              << "  p=" << d.probability << " margin=" << d.margin << "\n";
  }
}

int run_repl(const KnowledgeBase& kb, const TemplateStore& templates,
             const ScoringProvider& scorer) {
  std::cout << "koplqa repl; type a question, or :quit to exit\n";
  std::string line;
  while (std::cout << "? " << std::flush, std::getline(std::cin, line)) {
    if (line == ":quit" || line == ":q") break;
    if (line.empty()) continue;
    try {
      PipelineResult r = answer_question(line, kb, templates, scorer);
      std::cout << "program: " << serialize_program(r.program) << "\n";
      print_decisions(r.decisions);
      std::cout << "answer: " << r.answer.rendered << "\n";
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KoPL question answering over an in-memory knowledge base"};
  app.require_subcommand(1);

  std::string kb_path, template_path, program_path, question;
  std::string dataset_path, out_path, prompts_path;
  std::string pred_path, gold_path;
  std::string manual_path, augmented_path, train_out, val_out;
  std::string feedback_path = "feedback.jsonl";
  std::string validation_path;
  std::string host = "127.0.0.1";
  size_t count = 10;
  uint64_t seed = 42;
  size_t prompt_limit = 8000;
  double val_fraction = 0.05;
  int port = 8080;
  bool json_report = false;

  auto* load_cmd = app.add_subcommand("load", "validate a KB file and print counts");
  load_cmd->add_option("--kb", kb_path, "KB JSON file")->required();

  auto* exec_cmd = app.add_subcommand("exec", "execute a program JSON file");
  exec_cmd->add_option("--kb", kb_path)->required();
  exec_cmd->add_option("program", program_path, "program JSON file")->required();

  auto* answer_cmd = app.add_subcommand("answer", "answer a natural language question");
  answer_cmd->add_option("--kb", kb_path)->required();
  answer_cmd->add_option("--templates", template_path, "template store JSONL")->required();
  answer_cmd->add_option("question", question)->required();

  auto* augment_cmd =
      app.add_subcommand("augment", "mutate dataset programs and emit prompts");
  augment_cmd->add_option("--kb", kb_path)->required();
  augment_cmd->add_option("--dataset", dataset_path, "manual dataset JSONL")->required();
  augment_cmd->add_option("--out", out_path, "augmented JSONL output")->required();
  augment_cmd->add_option("--prompts", prompts_path, "prompt text output");
  augment_cmd->add_option("--count", count, "samples per unique program");
  augment_cmd->add_option("--seed", seed);
  augment_cmd->add_option("--prompt-limit", prompt_limit);

  auto* eval_cmd = app.add_subcommand("eval", "component accuracies pred vs gold");
  eval_cmd->add_option("--pred", pred_path, "predictions JSONL")->required();
  eval_cmd->add_option("--gold", gold_path, "gold JSONL")->required();
  eval_cmd->add_flag("--json", json_report, "emit machine readable JSON");

  auto* split_cmd = app.add_subcommand("split", "split dataset into train/validation");
  split_cmd->add_option("--manual", manual_path)->required();
  split_cmd->add_option("--augmented", augmented_path)->required();
  split_cmd->add_option("--train-out", train_out)->required();
  split_cmd->add_option("--val-out", val_out)->required();
  split_cmd->add_option("--val-fraction", val_fraction);
  split_cmd->add_option("--seed", seed);

  auto* serve_cmd = app.add_subcommand("serve", "start the HTTP service");
  serve_cmd->add_option("--kb", kb_path)->required();
  serve_cmd->add_option("--templates", template_path)->required();
  serve_cmd->add_option("--feedback", feedback_path);
  serve_cmd->add_option("--validation", validation_path, "validation dataset JSONL");
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);

  auto* repl_cmd = app.add_subcommand("repl", "interactive question loop");
  repl_cmd->add_option("--kb", kb_path)->required();
  repl_cmd->add_option("--templates", template_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (load_cmd->parsed()) {
      print_counts(KnowledgeBase::load_file(kb_path));
      return 0;
    }
    if (exec_cmd->parsed()) {
      auto kb = KnowledgeBase::load_file(kb_path);
      Program p = parse_program(slurp(program_path));
      Answer a = execute_program(kb, p);
      for (const auto& w : a.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << a.rendered << "\n";
      return 0;
    }
    if (answer_cmd->parsed()) {
      auto kb = KnowledgeBase::load_file(kb_path);
      auto templates = load_templates(template_path);
      TrigramScorer scorer;
      PipelineResult r = answer_question(question, kb, templates, scorer);
      std::cout << "program: " << serialize_program(r.program) << "\n";
      print_decisions(r.decisions);
      std::cout << "answer: " << r.answer.rendered << "\n";
      return 0;
    }
    if (augment_cmd->parsed()) {
      auto kb = KnowledgeBase::load_file(kb_path);
      auto manual = load_dataset(dataset_path);
      std::vector<std::pair<std::string, Program>> manual_pairs;
      for (const auto& s : manual)
        if (s.question) manual_pairs.emplace_back(*s.question, s.program);

      std::vector<DatasetSample> augmented;
      std::ofstream prompts;
      if (!prompts_path.empty()) prompts.open(prompts_path);
      size_t skipped = 0;
      std::set<std::string> unique_programs;
      for (size_t i = 0; i < manual.size(); ++i) {
        if (!unique_programs.insert(serialize_program(manual[i].program)).second)
          continue;
        MutationReport rep = mutate_program(manual[i].program, kb, count, seed + i,
                                            "manual-" + std::to_string(i));
        skipped += rep.skipped.size();
        for (const auto& sample : rep.samples) {
          DatasetSample ds;
          ds.program = sample.program;
          ds.source = "augmented";
          augmented.push_back(std::move(ds));
          if (prompts.is_open() && !manual_pairs.empty())
            prompts << build_prompt(sample, manual_pairs, prompt_limit).render()
                    << "\n----\n";
        }
      }
      save_dataset(out_path, augmented);
      std::cout << "augmented " << augmented.size() << " samples ("
                << skipped << " skipped) -> " << out_path << "\n";
      return 0;
    }
    if (eval_cmd->parsed()) {
      auto preds = load_dataset(pred_path);
      auto golds = load_dataset(gold_path);
      std::vector<Program> p, g;
      for (const auto& s : preds) p.push_back(s.program);
      for (const auto& s : golds) g.push_back(s.program);
      EvalReport report = evaluate(p, g);
      std::cout << (json_report ? report.to_json() : report.render_table());
      return 0;
    }
    if (split_cmd->parsed()) {
      auto manual = load_dataset(manual_path);
      auto augmented = load_dataset(augmented_path);
      SplitResult split = split_dataset(manual, augmented, val_fraction, seed);
      save_dataset(train_out, split.train);
      save_dataset(val_out, split.validation);
      std::cout << "train " << split.train.size() << " validation "
                << split.validation.size() << "\n";
      return 0;
    }
    if (serve_cmd->parsed()) {
      auto kb = KnowledgeBase::load_file(kb_path);
      auto templates = load_templates(template_path);
      TrigramScorer scorer;
      FeedbackLog log(feedback_path);
      std::vector<DatasetSample> validation;
      if (!validation_path.empty()) validation = load_dataset(validation_path);
      QaService service(kb, templates, scorer, log, std::move(validation));
      httplib::Server server;
      service.install(server);
      std::cout << "listening on " << host << ":" << port << "\n";
      server.listen(host, port);
      return 0;
    }
    if (repl_cmd->parsed()) {
      auto kb = KnowledgeBase::load_file(kb_path);
      auto templates = load_templates(template_path);
      TrigramScorer scorer;
      return run_repl(kb, templates, scorer);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
