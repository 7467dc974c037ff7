#include "clu/task.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "clu/errors.hpp"

namespace clu {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            throw ParseError(std::string("expected '") + c + "'", pos);
        ++pos;
    }
    std::int64_t integer() {
        skip_ws();
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) throw ParseError("expected an integer", start);
        return std::stoll(text.substr(start, pos - start));
    }
};

void validate_class_bookkeeping(const std::vector<TaskRequest>& requests) {
    std::set<int> learned, unlearned;
    for (const TaskRequest& r : requests) {
        if (r.by_samples()) {
            if (r.kind != TaskKind::Unlearn)
                throw ValidationError("sample-id payloads are only valid for unlearn requests");
            continue;  // id existence is checked at materialization time
        }
        if (r.kind == TaskKind::Learn) {
            for (int c : r.classes) {
                if (learned.count(c))
                    throw ValidationError("class " + std::to_string(c) +
                                          " appears in more than one learn task");
                learned.insert(c);
            }
        } else {
            for (int c : r.classes) {
                if (!learned.count(c))
                    throw ValidationError("unlearn request for class " + std::to_string(c) +
                                          " which was never learned");
                if (unlearned.count(c))
                    throw ValidationError("class " + std::to_string(c) + " unlearned twice");
                unlearned.insert(c);
            }
        }
    }
}

}  // namespace

std::vector<TaskRequest> parse_sequence(const std::string& text) {
    Cursor cur{text};
    if (cur.done()) throw ParseError("empty sequence", 0);
    std::vector<TaskRequest> requests;
    for (;;) {
        cur.expect('(');
        TaskRequest req;
        const char sign = cur.peek();
        if (sign == '+')
            req.kind = TaskKind::Learn;
        else if (sign == '-')
            req.kind = TaskKind::Unlearn;
        else
            throw ParseError("expected '+' or '-'", cur.pos);
        ++cur.pos;

        bool by_samples = false;
        cur.skip_ws();
        if (cur.pos + 1 < text.size() && text[cur.pos] == 's' && text[cur.pos + 1] == ':') {
            if (req.kind != TaskKind::Unlearn)
                throw ParseError("sample-id payload 's:' is only valid after '-'", cur.pos);
            by_samples = true;
            cur.pos += 2;
        }

        std::set<std::int64_t> seen;
        for (;;) {
            const std::size_t at = cur.pos;
            const std::int64_t v = cur.integer();
            if (!seen.insert(v).second)
                throw ValidationError("duplicate entry " + std::to_string(v) +
                                      " in one request group (byte " + std::to_string(at) + ")");
            if (by_samples)
                req.sample_ids.push_back(v);
            else
                req.classes.push_back(static_cast<int>(v));
            if (cur.peek() != ',') break;
            cur.expect(',');
        }
        cur.expect(')');
        requests.push_back(std::move(req));
        if (cur.done()) break;
        cur.expect(',');
    }
    validate_class_bookkeeping(requests);
    return requests;
}

std::string format_sequence(const std::vector<TaskRequest>& requests) {
    std::ostringstream out;
    for (std::size_t t = 0; t < requests.size(); ++t) {
        if (t) out << ",";
        const TaskRequest& r = requests[t];
        out << "(" << (r.kind == TaskKind::Learn ? "+" : "-");
        if (r.by_samples()) {
            out << "s:";
            for (std::size_t i = 0; i < r.sample_ids.size(); ++i)
                out << (i ? "," : "") << r.sample_ids[i];
        } else {
            for (std::size_t i = 0; i < r.classes.size(); ++i)
                out << (i ? "," : "") << r.classes[i];
        }
        out << ")";
    }
    return out.str();
}

TaskPlan build_class_incremental(const SplitDataset& data,
                                 const std::vector<TaskRequest>& requests) {
    validate_class_bookkeeping(requests);
    TaskPlan plan;
    plan.num_classes = data.train.num_classes;

    std::unordered_map<std::int64_t, int> train_row_of_id;
    for (int i = 0; i < data.train.size(); ++i) train_row_of_id[data.train.ids[static_cast<std::size_t>(i)]] = i;

    std::unordered_set<std::int64_t> learned_ids;
    for (const TaskRequest& req : requests) {
        TaskMaterial mat;
        mat.request = req;
        if (req.by_samples()) {
            std::vector<int> rows;
            for (std::int64_t id : req.sample_ids) {
                auto it = train_row_of_id.find(id);
                if (it == train_row_of_id.end())
                    throw ValidationError("unlearn sample id " + std::to_string(id) +
                                          " not present in the training data");
                if (!learned_ids.count(id))
                    throw ValidationError("unlearn sample id " + std::to_string(id) +
                                          " was never part of a learn task");
                rows.push_back(it->second);
            }
            mat.train = data.train.subset(rows);
        } else {
            std::vector<int> rows;
            for (int c : req.classes) {
                if (c < 0 || c >= data.train.num_classes)
                    throw ValidationError("request references class " + std::to_string(c) +
                                          " which does not exist in the dataset");
                const std::vector<int> class_rows = data.train.rows_of_class(c);
                if (class_rows.empty())
                    throw ValidationError("class " + std::to_string(c) + " has no training samples");
                if (data.test.rows_of_class(c).empty())
                    throw ValidationError("class " + std::to_string(c) + " has no held-out test samples");
                rows.insert(rows.end(), class_rows.begin(), class_rows.end());
            }
            mat.train = data.train.subset(rows);
            if (req.kind == TaskKind::Learn)
                for (std::int64_t id : mat.train.ids) learned_ids.insert(id);
        }
        plan.tasks.push_back(std::move(mat));
    }

    plan.class_test.resize(static_cast<std::size_t>(data.test.num_classes));
    for (int c = 0; c < data.test.num_classes; ++c)
        plan.class_test[static_cast<std::size_t>(c)] = data.test.subset(data.test.rows_of_class(c));
    return plan;
}

TaskPlan build_confusion(const SplitDataset& data, const std::vector<TaskRequest>& requests,
                         const ConfusionSpec& spec, bool inject_unlearn) {
    if (spec.fraction <= 0.0 || spec.fraction >= 1.0)
        throw ValidationError("build_confusion: fraction must be in (0,1)");
    TaskPlan base = build_class_incremental(data, requests);

    Rng rng(spec.seed);
    TaskPlan plan;
    plan.num_classes = base.num_classes;
    plan.class_test = std::move(base.class_test);

    const int c_count = data.train.num_classes;
    std::unordered_map<std::int64_t, int> noisy_label_of;
    for (std::size_t t = 0; t < base.tasks.size(); ++t) {
        TaskMaterial mat = std::move(base.tasks[t]);
        if (mat.request.kind != TaskKind::Learn) {
            // Explicit unlearn requests over confused ids must carry the label
            // the learner saw, not the hidden true one.
            for (int i = 0; i < mat.train.size(); ++i) {
                auto it = noisy_label_of.find(mat.train.ids[static_cast<std::size_t>(i)]);
                if (it != noisy_label_of.end()) mat.train.labels[i] = it->second;
            }
            plan.tasks.push_back(std::move(mat));
            continue;
        }
        const int n = mat.train.size();
        const int n_confused = static_cast<int>(std::llround(spec.fraction * n));
        if (n_confused < 1)
            throw ValidationError("build_confusion: fraction " + std::to_string(spec.fraction) +
                                  " selects no samples from a task of size " + std::to_string(n));

        std::vector<std::size_t> picked = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                                         static_cast<std::size_t>(n_confused));
        std::sort(picked.begin(), picked.end());

        ConfusionSet conf;
        conf.learn_task = static_cast<int>(plan.tasks.size());
        conf.true_labels.resize(n_confused);
        conf.noisy.features.resize(n_confused, mat.train.features.cols());
        conf.noisy.labels.resize(n_confused);
        for (int i = 0; i < n_confused; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(picked[static_cast<std::size_t>(i)]);
            const int true_label = mat.train.labels[row];
            int noisy = true_label;
            while (noisy == true_label) noisy = static_cast<int>(rng.below(static_cast<std::uint64_t>(c_count)));
            mat.train.labels[row] = noisy;  // label-shuffle only; features untouched
            conf.noisy.features.row(i) = mat.train.features.row(row);
            conf.noisy.labels[i] = noisy;
            conf.noisy.ids.push_back(mat.train.ids[static_cast<std::size_t>(row)]);
            conf.true_labels[i] = true_label;
            conf.ids.push_back(mat.train.ids[static_cast<std::size_t>(row)]);
            noisy_label_of[mat.train.ids[static_cast<std::size_t>(row)]] = noisy;
        }
        plan.tasks.push_back(std::move(mat));
        plan.confusion.push_back(std::move(conf));

        if (inject_unlearn) {
            const ConfusionSet& c = plan.confusion.back();
            TaskMaterial unlearn;
            unlearn.request.kind = TaskKind::Unlearn;
            unlearn.request.sample_ids = c.ids;
            unlearn.train = c.noisy;
            plan.tasks.push_back(std::move(unlearn));
        }
    }
    return plan;
}

}  // namespace clu
