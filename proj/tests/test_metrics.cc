#include <algorithm>
#include <cmath>

#include "chunk_oracle.h"
#include "doctest.h"
#include "pin/metrics.h"
#include "pin/rng.h"

namespace pin {
namespace {

using testing::brute_force;
using testing::Counts;
using testing::random_tags;
using testing::Tags;

TEST_CASE("extract_chunks") {
  CHECK(extract_chunks(Tags{"O", "B-timeRange", "I-timeRange", "O"}) ==
        std::vector<Chunk>{{"timeRange", 1, 2}});
  CHECK(extract_chunks(Tags{"O", "O", "O"}).empty());
  CHECK(extract_chunks(Tags{"I-artist", "I-artist"}) == std::vector<Chunk>{{"artist", 0, 1}});
  CHECK(extract_chunks(Tags{"B-a", "I-b", "B-a", "B-a"}) ==
        std::vector<Chunk>{{"a", 0, 0}, {"b", 1, 1}, {"a", 2, 2}, {"a", 3, 3}});
  CHECK(extract_chunks(Tags{"B-a", "junk", "I-a"}) == std::vector<Chunk>{{"a", 0, 0}, {"a", 2, 2}});
}

TEST_CASE("slot_f1 hand fixture") {
  std::vector<Tags> gold{{"O", "B-artist", "I-artist", "O", "O"}};
  std::vector<Tags> pred{{"O", "B-artist", "I-artist", "O", "B-album"}};
  SlotScores s = slot_f1(gold, pred);
  CHECK(s.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.recall == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(slot_f1(gold, gold).f1 == 1.0);

  SlotScores none = slot_f1(gold, std::vector<Tags>{{"O", "O", "O", "O", "O"}});
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK_THROWS(slot_f1(gold, std::vector<Tags>{{"O"}}));
  CHECK_THROWS(slot_f1(gold, std::vector<Tags>{}));
}

TEST_CASE("slot_f1 agrees with brute-force span matching") {
  Rng rng(7);
  const std::vector<std::string> types{"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.below(10);
    std::vector<Tags> gold{random_tags(rng, len, types)}, pred{random_tags(rng, len, types)};
    const Counts want = brute_force(gold, pred, types);
    const SlotScores got = slot_f1(gold, pred);
    CHECK(got.gold_chunks == want.gold);
    CHECK(got.predicted_chunks == want.pred);
    CHECK(got.matched_chunks == want.matched);
    const SlotScores swapped = slot_f1(pred, gold);
    CHECK(swapped.precision == got.recall);
    CHECK(swapped.recall == got.precision);
  }
}

TEST_CASE("intent error rate") {
  std::vector<std::string> gold{"a", "b", "c", "d"};
  CHECK(intent_error_rate(gold, std::vector<std::string>{"a", "b", "c", "x"}) == 0.25);
  CHECK(intent_error_rate(gold, gold) == 0.0);
  CHECK_THROWS(intent_error_rate(std::vector<std::string>{}, std::vector<std::string>{}));
  CHECK_THROWS(intent_error_rate(gold, std::vector<std::string>{"a"}));
}

TEST_CASE("sentence accuracy") {
  std::vector<std::string> intents{"a"};
  std::vector<Tags> tags{{"O", "B-x"}};
  CHECK(sentence_accuracy(intents, tags, intents, std::vector<Tags>{{"O", "O"}}) == 0.0);
  CHECK(sentence_accuracy(intents, tags, intents, tags) == 1.0);
  CHECK(sentence_accuracy(intents, tags, std::vector<std::string>{"b"}, tags) == 0.0);
  CHECK_THROWS(sentence_accuracy(std::vector<std::string>{}, std::vector<Tags>{}, std::vector<std::string>{},
                                 std::vector<Tags>{}));
}

TEST_CASE("metric identities on random corpora") {
  Rng rng(11);
  const std::vector<std::string> types{"a", "b"};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::string> gi, pi;
    std::vector<Tags> gt, pt;
    for (std::size_t u = 0; u < n; ++u) {
      gi.push_back(rng.bernoulli(0.5) ? "x" : "y");
      pi.push_back(rng.bernoulli(0.7) ? gi.back() : (gi.back() == "x" ? "y" : "x"));
      const std::size_t len = 1 + rng.below(4);
      gt.push_back(random_tags(rng, len, types));
      pt.push_back(rng.bernoulli(0.5) ? gt.back() : random_tags(rng, len, types));
    }
    const double err = intent_error_rate(gi, pi);
    std::size_t intent_right = 0, tags_right = 0, both = 0;
    for (std::size_t u = 0; u < n; ++u) {
      intent_right += gi[u] == pi[u];
      tags_right += gt[u] == pt[u];
      both += gi[u] == pi[u] && gt[u] == pt[u];
    }
    CHECK(err + static_cast<double>(intent_right) / n == doctest::Approx(1.0).epsilon(1e-12));
    const double acc = sentence_accuracy(gi, gt, pi, pt);
    CHECK(acc == static_cast<double>(both) / n);
    CHECK(acc <= std::min(1.0 - err, static_cast<double>(tags_right) / n) + 1e-12);
    if (acc == 1.0) {
      CHECK(err == 0.0);
      const SlotScores s = slot_f1(gt, pt);
      CHECK((s.f1 == 1.0 || s.gold_chunks == 0));
    }
  }
}

TEST_CASE("report text round trip") {
  MetricsReport r;
  r.intent_error_rate = 0.125;
  r.slot_precision = 0.5;
  r.slot_recall = 1.0;
  r.slot_f1 = 2.0 / 3.0;
  r.sentence_accuracy = 0.25;
  r.utterances = 8;
  r.gold_chunks = 3;
  r.predicted_chunks = 6;
  r.matched_chunks = 3;
  const std::string text = to_text(r);
  CHECK(text.find("slot_f1 = 0.666667") != std::string::npos);
  MetricsReport back = parse_report(text);
  CHECK(back.utterances == 8);
  CHECK(back.matched_chunks == 3);
  CHECK(back.intent_error_rate == 0.125);
  CHECK(to_text(back) == text);
}

}  // namespace
}  // namespace pin
