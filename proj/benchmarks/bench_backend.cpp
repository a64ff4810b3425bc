#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "clarity/autograd.hpp"
#include "clarity/model.hpp"
#include "clarity/tiny_backend.hpp"
#include "clarity/tokenizer.hpp"

namespace {

using clarity::make_input;
using clarity::Role;
using clarity::TinySeq2Seq;
using clarity::Vocab;

Vocab bench_vocab() {
  std::vector<std::string> texts;
  for (Role role : clarity::all_roles()) texts.push_back(clarity::prefix_text(role));
  texts.push_back(clarity::kMoralWord);
  texts.push_back(clarity::kImmoralWord);
  texts.push_back("mia helped her neighbor carry heavy boxes up the stairs");
  texts.push_back("it is kind to help neighbors in need");
  texts.push_back("helping someone carry a load shows care for them");
  return Vocab::build(texts);
}

TinySeq2Seq make_model(int hidden) {
  return TinySeq2Seq(bench_vocab(), {.hidden = hidden, .max_positions = 128, .seed = 7});
}

void bm_token_log_probs(benchmark::State& state) {
  TinySeq2Seq model = make_model(static_cast<int>(state.range(0)));
  clarity::PrefixedExample input =
      make_input(Role::ngen, "helping someone carry a load shows care for them");
  const std::string target = "it is kind to help neighbors in need";
  for (auto _ : state) benchmark::DoNotOptimize(model.token_log_probs(input, target));
}
BENCHMARK(bm_token_log_probs)->Arg(32)->Arg(64)->Arg(128);

void bm_generate(benchmark::State& state) {
  TinySeq2Seq model = make_model(static_cast<int>(state.range(0)));
  clarity::PrefixedExample input =
      make_input(Role::rgen_moral, "mia helped her neighbor carry heavy boxes up the stairs");
  for (auto _ : state) benchmark::DoNotOptimize(model.generate(input, 16));
}
BENCHMARK(bm_generate)->Arg(32)->Arg(64);

void bm_train_step(benchmark::State& state) {
  TinySeq2Seq model = make_model(static_cast<int>(state.range(0)));
  clarity::TokenSeq input = model.encode_input(
      make_input(Role::ngen, "helping someone carry a load shows care for them"));
  clarity::TokenSeq target = model.encode_target("it is kind to help neighbors in need");
  clarity::ag::Adam opt(model.params(), 1e-3);
  for (auto _ : state) {
    clarity::ag::Tape tape;
    clarity::ag::Var loss = model.build_loss(tape, input, target);
    opt.zero_grad();
    tape.backward(loss);
    opt.step();
    benchmark::DoNotOptimize(tape.val(loss)(0, 0));
  }
}
BENCHMARK(bm_train_step)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
