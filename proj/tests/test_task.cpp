#include <doctest.h>

#include <set>

#include "clu/dataset.hpp"
#include "clu/errors.hpp"
#include "clu/task.hpp"

using namespace clu;

namespace {

SplitDataset blob_split(int classes, int per_class, std::uint64_t seed) {
    BlobsConfig cfg;
    cfg.classes = classes;
    cfg.dim = 2;
    cfg.per_class = per_class;
    Rng rng(seed);
    const Dataset ds = make_blobs(cfg, rng);
    Rng split_rng(seed + 1);
    return split_train_test(ds, 0.25, split_rng);
}

}  // namespace

TEST_SUITE("task") {
    TEST_CASE("parses the paper-style sequence") {
        const auto reqs = parse_sequence("(+0,1),(+2,3),(-0,1)");
        REQUIRE(reqs.size() == 3);
        CHECK(reqs[0].kind == TaskKind::Learn);
        CHECK(reqs[0].classes == std::vector<int>{0, 1});
        CHECK(reqs[1].classes == std::vector<int>{2, 3});
        CHECK(reqs[2].kind == TaskKind::Unlearn);
        CHECK(reqs[2].classes == std::vector<int>{0, 1});
    }

    TEST_CASE("parses a single item") {
        const auto reqs = parse_sequence("(+0)");
        REQUIRE(reqs.size() == 1);
        CHECK(reqs[0].kind == TaskKind::Learn);
        CHECK(reqs[0].classes == std::vector<int>{0});
    }

    TEST_CASE("parses sample-id unlearn payloads") {
        const auto reqs = parse_sequence("(+0,1),(-s:10,11,12)");
        REQUIRE(reqs.size() == 2);
        CHECK(reqs[1].by_samples());
        CHECK(reqs[1].sample_ids == std::vector<std::int64_t>{10, 11, 12});
    }

    TEST_CASE("malformed text raises a parse error with a byte offset") {
        try {
            parse_sequence("(+0,1),(x2)");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 8);
        }
        CHECK_THROWS_AS(parse_sequence("(+0,1)("), ParseError);
        CHECK_THROWS_AS(parse_sequence(""), ParseError);
        CHECK_THROWS_AS(parse_sequence("(+s:1)"), ParseError);
    }

    TEST_CASE("duplicate class in one group is a validation error") {
        CHECK_THROWS_AS(parse_sequence("(+0,0)"), ValidationError);
    }

    TEST_CASE("unlearning an unseen class is a validation error") {
        CHECK_THROWS_AS(parse_sequence("(+0,1),(-2)"), ValidationError);
        CHECK_THROWS_AS(parse_sequence("(+0),(-0),(-0)"), ValidationError);
    }

    TEST_CASE("learn tasks must not overlap") {
        CHECK_THROWS_AS(parse_sequence("(+0,1),(+1,2)"), ValidationError);
    }

    TEST_CASE("round-trips through format_sequence") {
        const std::string text = "(+0,1),(+2,3),(-0),(-s:5,6)";
        CHECK(format_sequence(parse_sequence(text)) == text);
    }

    TEST_CASE("class-incremental split partitions the train data") {
        const SplitDataset split = blob_split(6, 40, 5);
        const TaskPlan plan = build_class_incremental(split, parse_sequence("(+0,1),(+2,3),(+4,5)"));
        REQUIRE(plan.tasks.size() == 3);
        std::set<std::int64_t> seen;
        int total = 0;
        for (const TaskMaterial& task : plan.tasks) {
            total += task.train.size();
            for (auto id : task.train.ids) CHECK(seen.insert(id).second);  // disjoint
        }
        CHECK(total == split.train.size());

        // Held-out test batches never appear in training.
        std::set<std::int64_t> test_ids;
        for (const Batch& tb : plan.class_test)
            test_ids.insert(tb.ids.begin(), tb.ids.end());
        for (auto id : seen) CHECK(test_ids.count(id) == 0);
    }

    TEST_CASE("missing class is a validation error") {
        const SplitDataset split = blob_split(4, 30, 6);
        CHECK_THROWS_AS(build_class_incremental(split, parse_sequence("(+0,1),(+7)")), ValidationError);
    }

    TEST_CASE("same dataset and seed give identical splits") {
        const SplitDataset a = blob_split(6, 40, 9);
        const SplitDataset b = blob_split(6, 40, 9);
        CHECK(a.train.ids == b.train.ids);
        CHECK((a.train.features - b.train.features).cwiseAbs().maxCoeff() == 0.0);
        const TaskPlan pa = build_class_incremental(a, parse_sequence("(+0,1),(+2,3)"));
        const TaskPlan pb = build_class_incremental(b, parse_sequence("(+0,1),(+2,3)"));
        for (std::size_t t = 0; t < pa.tasks.size(); ++t)
            CHECK(pa.tasks[t].train.ids == pb.tasks[t].train.ids);
    }

    TEST_CASE("unlearn-by-class materializes that class's training data") {
        const SplitDataset split = blob_split(4, 30, 7);
        const TaskPlan plan = build_class_incremental(split, parse_sequence("(+0,1),(+2,3),(-0)"));
        const TaskMaterial& unlearn = plan.tasks[2];
        CHECK(unlearn.train.size() == static_cast<int>(split.train.rows_of_class(0).size()));
        for (int i = 0; i < unlearn.train.size(); ++i) CHECK(unlearn.train.labels[i] == 0);
    }

    TEST_CASE("confusion shuffles the configured fraction with distinct labels") {
        const SplitDataset split = blob_split(4, 50, 11);
        ConfusionSpec spec;
        spec.fraction = 0.1;
        spec.seed = 77;
        const TaskPlan plan =
            build_confusion(split, parse_sequence("(+0,1),(+2,3)"), spec, /*inject_unlearn=*/true);
        REQUIRE(plan.confusion.size() == 2);
        // Learn, unlearn, learn, unlearn.
        REQUIRE(plan.tasks.size() == 4);
        CHECK(plan.tasks[1].request.kind == TaskKind::Unlearn);
        CHECK(plan.tasks[1].request.by_samples());

        for (const ConfusionSet& conf : plan.confusion) {
            const int task_size = plan.tasks[static_cast<std::size_t>(conf.learn_task)].train.size();
            CHECK(conf.noisy.size() == static_cast<int>(std::llround(0.1 * task_size)));
            for (int i = 0; i < conf.noisy.size(); ++i)
                CHECK(conf.noisy.labels[i] != conf.true_labels[i]);
        }
    }

    TEST_CASE("confusion is label-shuffle only: features are untouched") {
        const SplitDataset split = blob_split(4, 50, 13);
        ConfusionSpec spec;
        spec.fraction = 0.2;
        spec.seed = 5;
        const TaskPlan noisy = build_confusion(split, parse_sequence("(+0,1),(+2,3)"), spec, false);
        const TaskPlan clean = build_class_incremental(split, parse_sequence("(+0,1),(+2,3)"));
        for (std::size_t t = 0; t < clean.tasks.size(); ++t) {
            CHECK((noisy.tasks[t].train.features - clean.tasks[t].train.features).cwiseAbs().maxCoeff() ==
                  0.0);
            CHECK(noisy.tasks[t].train.ids == clean.tasks[t].train.ids);
        }
    }

    TEST_CASE("confusion with a forced single sample and two classes flips it") {
        const SplitDataset split = blob_split(2, 10, 17);
        ConfusionSpec spec;
        const int task_size = static_cast<int>(split.train.size());
        spec.fraction = 1.05 / task_size;  // rounds to exactly one sample
        spec.seed = 3;
        const TaskPlan plan = build_confusion(split, parse_sequence("(+0,1)"), spec, false);
        REQUIRE(plan.confusion.size() == 1);
        REQUIRE(plan.confusion[0].noisy.size() == 1);
        const int noisy = plan.confusion[0].noisy.labels[0];
        const int truth = plan.confusion[0].true_labels[0];
        CHECK(noisy != truth);
        CHECK(noisy == 1 - truth);
    }

    TEST_CASE("confusion fraction too small is a validation error") {
        const SplitDataset split = blob_split(4, 50, 19);
        ConfusionSpec spec;
        spec.fraction = 0.001;  // selects zero samples per task
        CHECK_THROWS_AS(build_confusion(split, parse_sequence("(+0,1)"), spec, false), ValidationError);
    }

    TEST_CASE("same confusion seed gives an identical assignment") {
        const SplitDataset split = blob_split(4, 50, 23);
        ConfusionSpec spec;
        spec.fraction = 0.1;
        spec.seed = 99;
        const TaskPlan a = build_confusion(split, parse_sequence("(+0,1),(+2,3)"), spec, false);
        const TaskPlan b = build_confusion(split, parse_sequence("(+0,1),(+2,3)"), spec, false);
        for (std::size_t i = 0; i < a.confusion.size(); ++i) {
            CHECK(a.confusion[i].ids == b.confusion[i].ids);
            CHECK((a.confusion[i].noisy.labels - b.confusion[i].noisy.labels).cwiseAbs().maxCoeff() == 0);
        }
    }

    TEST_CASE("unlearn sample ids must come from earlier learn tasks") {
        const SplitDataset split = blob_split(4, 30, 29);
        // Ids of class-2 samples are not learned by task (+0,1).
        const std::vector<int> rows = split.train.rows_of_class(2);
        const std::int64_t foreign = split.train.ids[static_cast<std::size_t>(rows.front())];
        const std::string seq = "(+0,1),(-s:" + std::to_string(foreign) + ")";
        CHECK_THROWS_AS(build_class_incremental(split, parse_sequence(seq)), ValidationError);
    }

    TEST_CASE("csv round-trip preserves samples and ids") {
        const SplitDataset split = blob_split(3, 10, 31);
        const std::string path = "/tmp/clu_test_roundtrip.csv";
        save_csv(split.train, path);
        const Dataset loaded = load_csv(path);
        CHECK(loaded.size() == split.train.size());
        CHECK(loaded.ids == split.train.ids);
        CHECK((loaded.features - split.train.features).cwiseAbs().maxCoeff() == 0.0);
    }
}
