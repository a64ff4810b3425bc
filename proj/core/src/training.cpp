#include "clarity/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

TrainLog::TrainLog(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open train log: " + path.string());
}

void TrainLog::append(const TrainLogEntry& e) {
  json j{{"step", e.step},
         {"loss_rgen", e.loss_rgen},
         {"loss_ngen", e.loss_ngen},
         {"loss_triplet", e.loss_triplet},
         {"loss_total", e.loss_total},
         {"split", e.split}};
  out_ << j.dump() << "\n";
  out_.flush();
}

std::vector<TrainLogEntry> read_train_log(const std::filesystem::path& path) {
  std::vector<TrainLogEntry> out;
  for (const json& j : read_jsonl(path)) {
    TrainLogEntry e;
    e.step = j.at("step").get<int>();
    e.loss_rgen = j.at("loss_rgen").get<double>();
    e.loss_ngen = j.at("loss_ngen").get<double>();
    e.loss_triplet = j.at("loss_triplet").get<double>();
    e.loss_total = j.at("loss_total").get<double>();
    e.split = j.at("split").get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

Vocab build_vocab(const std::vector<CuratedPair>& curated) {
  std::vector<std::string> texts;
  for (Role r : all_roles()) texts.push_back(prefix_text(r));
  texts.emplace_back(kMoralWord);
  texts.emplace_back(kImmoralWord);
  for (const CuratedPair& c : curated) {
    texts.push_back(c.pair.norm);
    texts.push_back(c.pair.moral_action);
    texts.push_back(c.pair.immoral_action);
    texts.push_back(c.moral_rationale);
    texts.push_back(c.immoral_rationale);
  }
  return Vocab::build(texts);
}

namespace {

Seq2SeqExample encode_example(const Vocab& vocab, const PrefixedExample& input,
                              const std::string& target) {
  Seq2SeqExample ex;
  ex.input_ids = vocab.encode(input.text);
  ex.target_ids = vocab.encode(target);
  ex.target_ids.push_back(Vocab::kEos);
  return ex;
}

}  // namespace

std::vector<Seq2SeqExample> build_examples(ModelKind kind,
                                           const std::vector<CuratedPair>& curated,
                                           const Vocab& vocab, Split split,
                                           std::size_t max_input_len) {
  std::vector<Seq2SeqExample> out;
  for (const CuratedPair& c : curated) {
    if (c.pair.split != split) continue;
    switch (kind) {
      case ModelKind::rationale_generator:
        out.push_back(encode_example(
            vocab, make_input(Role::rgen_moral, c.pair.moral_action, "", max_input_len),
            c.moral_rationale));
        out.push_back(encode_example(
            vocab,
            make_input(Role::rgen_immoral, c.pair.immoral_action, "", max_input_len),
            c.immoral_rationale));
        break;
      case ModelKind::norm_generator:
        out.push_back(encode_example(
            vocab, make_input(Role::ngen, c.moral_rationale, "", max_input_len),
            c.pair.norm));
        out.push_back(encode_example(
            vocab, make_input(Role::ngen, c.immoral_rationale, "", max_input_len),
            c.pair.norm));
        break;
      case ModelKind::classifier:
        for (int side = 0; side < 2; ++side) {
          const bool moral = side == 0;
          const std::string& action = moral ? c.pair.moral_action : c.pair.immoral_action;
          const std::string& rationale = moral ? c.moral_rationale : c.immoral_rationale;
          const std::string verbalizer = moral ? kMoralWord : kImmoralWord;
          out.push_back(encode_example(
              vocab, make_input(Role::cls_action_only, action, "", max_input_len),
              verbalizer));
          out.push_back(encode_example(
              vocab,
              make_input(Role::cls_action_rationale, action, rationale, max_input_len),
              verbalizer));
          out.push_back(encode_example(
              vocab, make_input(Role::cls_action_norm, action, c.pair.norm, max_input_len),
              verbalizer));
        }
        break;
    }
  }
  return out;
}

std::vector<ag::Mat> snapshot_params(TinySeq2Seq& model) {
  std::vector<ag::Mat> out;
  for (ag::Param* p : model.params()) out.push_back(p->value);
  return out;
}

void restore_params(TinySeq2Seq& model, const std::vector<ag::Mat>& values) {
  std::vector<ag::Param*> params = model.params();
  if (params.size() != values.size())
    throw std::invalid_argument("restore_params: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

namespace {

double mean_example_loss(TinySeq2Seq& model, const std::vector<Seq2SeqExample>& examples) {
  double total = 0.0;
  for (const Seq2SeqExample& ex : examples) {
    std::vector<double> lp = model.token_log_probs_ids(ex.input_ids, ex.target_ids);
    double s = 0.0;
    for (double v : lp) s += v;
    total += -s / static_cast<double>(lp.size());
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace

PretrainResult pretrain(ModelKind kind, const std::vector<CuratedPair>& curated,
                        const TinySeq2Seq::Config& model_cfg, const TrainConfig& cfg,
                        TrainLog* log) {
  auto model = std::make_unique<TinySeq2Seq>(build_vocab(curated), model_cfg);
  const std::vector<Seq2SeqExample> train =
      build_examples(kind, curated, model->vocab(), Split::train, cfg.max_input_len);
  const std::vector<Seq2SeqExample> val =
      build_examples(kind, curated, model->vocab(), Split::validation, cfg.max_input_len);
  if (train.empty()) throw std::runtime_error("pretrain: no training examples");

  ag::Adam opt(model->params(), cfg.lr);
  opt.set_clip_norm(cfg.grad_clip);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const bool have_val = !val.empty();
  double best = std::numeric_limits<double>::infinity();
  std::vector<ag::Mat> best_params = snapshot_params(*model);

  auto log_entry = [&](int step, double loss, const std::string& split) {
    if (log == nullptr) return;
    TrainLogEntry e;
    e.step = step;
    e.split = split;
    e.loss_total = loss;
    if (kind == ModelKind::rationale_generator) e.loss_rgen = loss;
    if (kind == ModelKind::norm_generator) e.loss_ngen = loss;
    log->append(e);
  };
  auto maybe_keep_best = [&](int step) {
    if (!have_val) return;
    double v = mean_example_loss(*model, val);
    log_entry(step, v, "validation");
    if (v < best) {
      best = v;
      best_params = snapshot_params(*model);
    }
  };

  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs && step < cfg.max_steps; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size() && step < cfg.max_steps;
         at += static_cast<std::size_t>(cfg.batch_size)) {
      ++step;
      std::size_t hi = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      ag::Tape tape;
      ag::Var total = model->build_loss(tape, train[order[at]].input_ids,
                                        train[order[at]].target_ids);
      for (std::size_t i = at + 1; i < hi; ++i)
        total = tape.add(total, model->build_loss(tape, train[order[i]].input_ids,
                                                  train[order[i]].target_ids));
      ag::Var loss = tape.scale(total, 1.0 / static_cast<double>(hi - at));
      tape.backward(loss);
      opt.step();
      opt.zero_grad();
      log_entry(step, tape.val(loss)(0, 0), "train");
      if (cfg.eval_every > 0 && step % cfg.eval_every == 0) maybe_keep_best(step);
    }
  }
  maybe_keep_best(step);
  if (have_val) restore_params(*model, best_params);

  PretrainResult result;
  result.model = std::move(model);
  result.best_val_loss = have_val ? best : std::numeric_limits<double>::quiet_NaN();
  result.steps_run = step;
  return result;
}

double triplet_loss(const Eigen::VectorXd& anchor, const Eigen::VectorXd& positive,
                    const Eigen::VectorXd& negative, double alpha) {
  double d_ap = (anchor - positive).norm();
  double d_an = (anchor - negative).norm();
  return std::max(d_ap - d_an + alpha, 0.0);
}

ag::Var triplet_loss_node(ag::Tape& tape, ag::Var anchor, ag::Var positive,
                          ag::Var negative, double alpha) {
  auto dist = [&](ag::Var a, ag::Var b) {
    ag::Var diff = tape.sub(a, b);
    return tape.sqrt(tape.sum_all(tape.cmul(diff, diff)));
  };
  ag::Var gap = tape.add_scalar(tape.sub(dist(anchor, positive), dist(anchor, negative)),
                                alpha);
  return tape.relu(gap);
}

namespace {

Role rationale_role(Label label) {
  return label == Label::moral ? Role::rgen_moral : Role::rgen_immoral;
}

// Greedy rationale for an action from the current generator. Falls back to
// the action text when the decode is empty, so downstream inputs stay valid.
std::string decoded_rationale(TinySeq2Seq& rgen, Label label, const std::string& action,
                              const TrainConfig& cfg) {
  PrefixedExample in = make_input(rationale_role(label), action, "", cfg.max_input_len);
  std::string decoded = rgen.generate(in, cfg.max_generate_len);
  return trim(decoded).empty() ? action : decoded;
}

// Norm-space embedding of one triplet element as a tape node (gradients flow
// into the norm generator only; the rationale is a constant decode).
ag::Var embed_node(ag::Tape& tape, TinySeq2Seq& rgen, TinySeq2Seq& ngen,
                   const ActionRecord& rec, const TrainConfig& cfg) {
  std::string rationale = decoded_rationale(rgen, rec.gold_label, rec.action, cfg);
  PrefixedExample in = make_input(Role::ngen, rationale, "", cfg.max_input_len);
  return ngen.build_pooled_state(tape, ngen.vocab().encode(in.text),
                                 ngen.encode_target(rec.norm));
}

Eigen::VectorXd embed_value(TinySeq2Seq& rgen, TinySeq2Seq& ngen, const ActionRecord& rec,
                            const TrainConfig& cfg) {
  std::string rationale = decoded_rationale(rgen, rec.gold_label, rec.action, cfg);
  PrefixedExample in = make_input(Role::ngen, rationale, "", cfg.max_input_len);
  return ngen.pooled_decoder_state(in, rec.norm);
}

ActionRecord anchor_of(const CuratedPair& c) {
  return {c.pair.moral_action, Label::moral, c.pair.pair_id, c.pair.norm};
}
ActionRecord positive_of(const CuratedPair& c) {
  return {c.pair.immoral_action, Label::immoral, c.pair.pair_id, c.pair.norm};
}

// Index of a uniformly sampled pair whose norm differs from pairs[i]'s.
std::size_t sample_negative(const std::vector<const CuratedPair*>& pairs, std::size_t i,
                            std::mt19937_64& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < pairs.size(); ++j)
    if (pairs[j]->pair.norm != pairs[i]->pair.norm) candidates.push_back(j);
  if (candidates.empty())
    throw std::runtime_error("finetune: no valid negatives for pair '" +
                             pairs[i]->pair.pair_id + "' (all norms identical)");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

double mean_anchor_positive_distance(TinySeq2Seq& rgen, TinySeq2Seq& ngen,
                                     const std::vector<const CuratedPair*>& pairs,
                                     const TrainConfig& cfg) {
  double total = 0.0;
  for (const CuratedPair* c : pairs) {
    Eigen::VectorXd a = embed_value(rgen, ngen, anchor_of(*c), cfg);
    Eigen::VectorXd p = embed_value(rgen, ngen, positive_of(*c), cfg);
    total += (a - p).norm();
  }
  return total / static_cast<double>(pairs.size());
}

struct PairExamples {
  Seq2SeqExample rgen_moral, rgen_immoral;
  Seq2SeqExample ngen_moral, ngen_immoral;
};

PairExamples encode_pair(const CuratedPair& c, const Vocab& rgen_vocab,
                         const Vocab& ngen_vocab, std::size_t max_input_len) {
  PairExamples ex;
  ex.rgen_moral = encode_example(
      rgen_vocab, make_input(Role::rgen_moral, c.pair.moral_action, "", max_input_len),
      c.moral_rationale);
  ex.rgen_immoral = encode_example(
      rgen_vocab, make_input(Role::rgen_immoral, c.pair.immoral_action, "", max_input_len),
      c.immoral_rationale);
  ex.ngen_moral = encode_example(
      ngen_vocab, make_input(Role::ngen, c.moral_rationale, "", max_input_len),
      c.pair.norm);
  ex.ngen_immoral = encode_example(
      ngen_vocab, make_input(Role::ngen, c.immoral_rationale, "", max_input_len),
      c.pair.norm);
  return ex;
}

}  // namespace

FinetuneResult finetune(TinySeq2Seq& rationale_gen, TinySeq2Seq& norm_gen,
                        const std::vector<CuratedPair>& curated, const TrainConfig& cfg,
                        bool supervised, bool contrastive, TrainLog* log) {
  if (!supervised && !contrastive)
    throw std::invalid_argument("finetune: all objective terms disabled");
  std::vector<const CuratedPair*> train_pairs, val_pairs;
  for (const CuratedPair& c : curated) {
    if (c.pair.split == Split::train) train_pairs.push_back(&c);
    if (c.pair.split == Split::validation) val_pairs.push_back(&c);
  }
  if (train_pairs.empty()) throw std::runtime_error("finetune: no training pairs");

  std::vector<PairExamples> train_ex, val_ex;
  for (const CuratedPair* c : train_pairs)
    train_ex.push_back(
        encode_pair(*c, rationale_gen.vocab(), norm_gen.vocab(), cfg.max_input_len));
  for (const CuratedPair* c : val_pairs)
    val_ex.push_back(
        encode_pair(*c, rationale_gen.vocab(), norm_gen.vocab(), cfg.max_input_len));

  std::vector<ag::Param*> params = rationale_gen.params();
  for (ag::Param* p : norm_gen.params()) params.push_back(p);
  ag::Adam opt(params, cfg.lr);
  opt.set_clip_norm(cfg.grad_clip);
  std::mt19937_64 rng(cfg.seed);

  FinetuneResult result;
  result.initial_anchor_positive_distance =
      mean_anchor_positive_distance(rationale_gen, norm_gen, train_pairs, cfg);

  // The validation objective includes the triplet term only when validation
  // pairs can form triplets among themselves.
  bool val_triplets_ok = false;
  if (contrastive && val_pairs.size() >= 2) {
    for (std::size_t i = 0; i < val_pairs.size() && !val_triplets_ok; ++i)
      for (std::size_t j = 0; j < val_pairs.size(); ++j)
        if (val_pairs[j]->pair.norm != val_pairs[i]->pair.norm) {
          val_triplets_ok = true;
          break;
        }
  }

  auto evaluate = [&]() -> std::array<double, 4> {
    double l_rgen = 0.0, l_ngen = 0.0, l_trip = 0.0;
    if (supervised) {
      for (const PairExamples& ex : val_ex) {
        l_rgen += mean_example_loss(rationale_gen, {ex.rgen_moral, ex.rgen_immoral});
        l_ngen += mean_example_loss(norm_gen, {ex.ngen_moral, ex.ngen_immoral});
      }
      l_rgen /= static_cast<double>(val_ex.size());
      l_ngen /= static_cast<double>(val_ex.size());
    }
    if (val_triplets_ok) {
      std::mt19937_64 val_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
      for (std::size_t i = 0; i < val_pairs.size(); ++i) {
        std::size_t j = sample_negative(val_pairs, i, val_rng);
        Eigen::VectorXd a = embed_value(rationale_gen, norm_gen, anchor_of(*val_pairs[i]), cfg);
        Eigen::VectorXd p = embed_value(rationale_gen, norm_gen, positive_of(*val_pairs[i]), cfg);
        Eigen::VectorXd n = embed_value(rationale_gen, norm_gen, anchor_of(*val_pairs[j]), cfg);
        l_trip += triplet_loss(a, p, n, cfg.margin);
      }
      l_trip /= static_cast<double>(val_pairs.size());
    }
    double total =
        (supervised ? cfg.lambda_rgen * l_rgen + cfg.lambda_ngen * l_ngen : 0.0) +
        (val_triplets_ok ? cfg.lambda_triplet * l_trip : 0.0);
    return {l_rgen, l_ngen, l_trip, total};
  };

  const bool have_val = !val_ex.empty();
  double best = std::numeric_limits<double>::infinity();
  std::vector<ag::Mat> best_rgen = snapshot_params(rationale_gen);
  std::vector<ag::Mat> best_ngen = snapshot_params(norm_gen);

  auto maybe_keep_best = [&](int step) {
    if (!have_val) return;
    auto [l_r, l_n, l_t, total] = evaluate();
    if (log != nullptr)
      log->append({step, l_r, l_n, l_t, total, "validation"});
    if (total < best) {
      best = total;
      best_rgen = snapshot_params(rationale_gen);
      best_ngen = snapshot_params(norm_gen);
    }
  };

  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs && step < cfg.max_steps; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size() && step < cfg.max_steps;
         at += static_cast<std::size_t>(cfg.batch_size)) {
      ++step;
      std::size_t hi = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      std::size_t count = hi - at;

      ag::Tape tape;
      std::optional<ag::Var> sum_rgen, sum_ngen, sum_trip;
      auto accumulate = [&tape](std::optional<ag::Var>& acc, ag::Var v) {
        acc = acc ? tape.add(*acc, v) : v;
      };
      for (std::size_t i = at; i < hi; ++i) {
        const PairExamples& ex = train_ex[order[i]];
        if (supervised) {
          accumulate(sum_rgen, rationale_gen.build_loss(tape, ex.rgen_moral.input_ids,
                                                        ex.rgen_moral.target_ids));
          accumulate(sum_rgen, rationale_gen.build_loss(tape, ex.rgen_immoral.input_ids,
                                                        ex.rgen_immoral.target_ids));
          accumulate(sum_ngen, norm_gen.build_loss(tape, ex.ngen_moral.input_ids,
                                                   ex.ngen_moral.target_ids));
          accumulate(sum_ngen, norm_gen.build_loss(tape, ex.ngen_immoral.input_ids,
                                                   ex.ngen_immoral.target_ids));
        }
        if (contrastive) {
          std::size_t j = sample_negative(train_pairs, order[i], rng);
          ag::Var a = embed_node(tape, rationale_gen, norm_gen,
                                 anchor_of(*train_pairs[order[i]]), cfg);
          ag::Var p = embed_node(tape, rationale_gen, norm_gen,
                                 positive_of(*train_pairs[order[i]]), cfg);
          ag::Var n =
              embed_node(tape, rationale_gen, norm_gen, anchor_of(*train_pairs[j]), cfg);
          accumulate(sum_trip, triplet_loss_node(tape, a, p, n, cfg.margin));
        }
      }
      double inv2 = 1.0 / static_cast<double>(2 * count);
      double inv1 = 1.0 / static_cast<double>(count);
      double rgen_val = 0.0, ngen_val = 0.0, trip_val = 0.0;
      std::optional<ag::Var> total;
      if (supervised) {
        ag::Var l_rgen = tape.scale(*sum_rgen, inv2);
        ag::Var l_ngen = tape.scale(*sum_ngen, inv2);
        rgen_val = tape.val(l_rgen)(0, 0);
        ngen_val = tape.val(l_ngen)(0, 0);
        total = tape.add(tape.scale(l_rgen, cfg.lambda_rgen),
                         tape.scale(l_ngen, cfg.lambda_ngen));
      }
      if (contrastive) {
        ag::Var l_trip = tape.scale(*sum_trip, inv1);
        trip_val = tape.val(l_trip)(0, 0);
        ag::Var weighted = tape.scale(l_trip, cfg.lambda_triplet);
        total = total ? tape.add(*total, weighted) : weighted;
      }
      tape.backward(*total);
      opt.step();
      opt.zero_grad();

      if (log != nullptr)
        log->append({step, rgen_val, ngen_val, trip_val, tape.val(*total)(0, 0),
                     "train"});
      if (cfg.eval_every > 0 && step % cfg.eval_every == 0) maybe_keep_best(step);
    }
  }
  maybe_keep_best(step);
  if (have_val) {
    restore_params(rationale_gen, best_rgen);
    restore_params(norm_gen, best_ngen);
  }

  result.best_val_objective = have_val ? best : std::numeric_limits<double>::quiet_NaN();
  result.steps_run = step;
  result.final_anchor_positive_distance =
      mean_anchor_positive_distance(rationale_gen, norm_gen, train_pairs, cfg);
  return result;
}

}  // namespace clarity
