#pragma once

// Versioned text format for trained models. A model is a nested list of records:
//
//   (setar-tree 1
//     (layout (lags 10) (covariate "dow" categorical "Mon" "Tue"))
//     (stopping both 0.05 2 0.03 1000)
//     (node (split 0 0.5 12.1 10.4 22.5 300 420)
//       (node (leaf 300 12.1 11 (beta 0.1 0.9 ...)))
//       (node (leaf ...))))
//
// Reals are written in shortest round-trip form, so a loaded model forecasts bit-identically.

#include "setar/error.hpp"
#include "setar/setar_forest.hpp"
#include "setar/setar_tree.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace setar::io {

class ModelFormatError : public DataError {
public:
    explicit ModelFormatError(const std::string& what) : DataError("ModelFormat", "model file: " + what) {}
};

inline constexpr int kFormatVersion = 1;

struct Sexp {
    bool is_list = false;
    std::string atom;
    std::vector<Sexp> items;

    const std::string& head() const {
        if (!is_list || items.empty() || items[0].is_list) throw ModelFormatError("expected a tagged record");
        return items[0].atom;
    }
    const Sexp& at(std::size_t i) const {
        if (!is_list || i >= items.size()) throw ModelFormatError("record '" + head() + "' is too short");
        return items[i];
    }
    const std::string& text(std::size_t i) const {
        const auto& s = at(i);
        if (s.is_list) throw ModelFormatError("expected an atom in '" + head() + "'");
        return s.atom;
    }
};

inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_real(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ModelFormatError("bad number '" + s + "'");
    return v;
}

inline std::size_t parse_count(const std::string& s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ModelFormatError("bad integer '" + s + "'");
    return v;
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

class SexpReader {
public:
    explicit SexpReader(std::string_view text) : text_(text) {}

    Sexp read() {
        skip_space();
        if (pos_ >= text_.size()) throw ModelFormatError("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Sexp list;
            list.is_list = true;
            for (;;) {
                skip_space();
                if (pos_ >= text_.size()) throw ModelFormatError("unbalanced parentheses");
                if (text_[pos_] == ')') {
                    ++pos_;
                    return list;
                }
                list.items.push_back(read());
            }
        }
        if (c == ')') throw ModelFormatError("unexpected ')'");
        Sexp atom;
        if (c == '"') {
            ++pos_;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
                atom.atom += text_[pos_++];
            }
            if (pos_ >= text_.size()) throw ModelFormatError("unterminated string");
            ++pos_;
            return atom;
        }
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')') {
            atom.atom += text_[pos_++];
        }
        return atom;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    std::string_view text_;
    std::size_t pos_ = 0;
};

inline const char* criterion_name(StoppingCriterion c) {
    switch (c) {
    case StoppingCriterion::lin_test:
        return "lin-test";
    case StoppingCriterion::error_red:
        return "error-red";
    case StoppingCriterion::both:
        return "both";
    }
    return "both";
}

inline StoppingCriterion parse_criterion(const std::string& s) {
    if (s == "lin-test" || s == "lin_test") return StoppingCriterion::lin_test;
    if (s == "error-red" || s == "error_red") return StoppingCriterion::error_red;
    if (s == "both") return StoppingCriterion::both;
    throw UsageError("unknown stopping criterion '" + s + "'");
}

namespace detail {

inline void indent(std::ostream& os, int depth) {
    for (int i = 0; i < depth; ++i) os << "  ";
}

inline void write_layout(std::ostream& os, const FeatureLayout& layout, int depth) {
    indent(os, depth);
    os << "(layout (lags " << layout.n_lags << ")";
    for (const auto& c : layout.covariates) {
        os << " (covariate " << quote(c.name) << ' '
           << (c.kind == CovariateKind::numeric ? "numeric" : "categorical");
        for (const auto& cat : c.categories) os << ' ' << quote(cat);
        os << ')';
    }
    os << ")\n";
}

inline void write_stopping(std::ostream& os, const StoppingConfig& c, int depth) {
    indent(os, depth);
    os << "(stopping " << criterion_name(c.criterion) << ' ' << format_real(c.alpha0) << ' '
       << format_real(c.significance_divider) << ' ' << format_real(c.error_threshold) << ' '
       << c.max_depth << ")\n";
}

inline void write_node(std::ostream& os, const SetarTree& tree, std::size_t id, int depth) {
    const auto& node = tree.nodes[id];
    indent(os, depth);
    if (node.is_leaf) {
        const auto& leaf = tree.leaves[node.leaf];
        os << "(node (leaf " << leaf.n_train_rows << ' ' << format_real(leaf.fit.sse) << ' '
           << leaf.fit.rank << " (beta";
        for (Eigen::Index k = 0; k < leaf.fit.beta.size(); ++k) os << ' ' << format_real(leaf.fit.beta(k));
        os << ")))\n";
        return;
    }
    const auto& d = node.decision;
    os << "(node (split " << d.column_index << ' ' << format_real(d.threshold) << ' '
       << format_real(d.left_sse) << ' ' << format_real(d.right_sse) << ' ' << format_real(d.total_sse)
       << ' ' << d.left_count << ' ' << d.right_count << ")\n";
    write_node(os, tree, node.left, depth + 1);
    write_node(os, tree, node.right, depth + 1);
    indent(os, depth);
    os << ")\n";
}

inline FeatureLayout read_layout(const Sexp& s) {
    if (s.head() != "layout") throw ModelFormatError("expected layout");
    FeatureLayout layout;
    for (std::size_t i = 1; i < s.items.size(); ++i) {
        const auto& item = s.items[i];
        if (item.head() == "lags") {
            layout.n_lags = parse_count(item.text(1));
        } else if (item.head() == "covariate") {
            CovariateSpec spec;
            spec.name = item.text(1);
            const auto& kind = item.text(2);
            if (kind == "numeric") {
                spec.kind = CovariateKind::numeric;
            } else if (kind == "categorical") {
                spec.kind = CovariateKind::categorical;
            } else {
                throw ModelFormatError("unknown covariate kind '" + kind + "'");
            }
            for (std::size_t k = 3; k < item.items.size(); ++k) spec.categories.push_back(item.text(k));
            layout.covariates.push_back(std::move(spec));
        } else {
            throw ModelFormatError("unknown layout entry '" + item.head() + "'");
        }
    }
    return layout;
}

inline StoppingConfig read_stopping(const Sexp& s) {
    if (s.head() != "stopping") throw ModelFormatError("expected stopping");
    StoppingConfig c;
    c.criterion = parse_criterion(s.text(1));
    c.alpha0 = parse_real(s.text(2));
    c.significance_divider = parse_real(s.text(3));
    c.error_threshold = parse_real(s.text(4));
    c.max_depth = parse_count(s.text(5));
    return c;
}

inline std::size_t read_node(const Sexp& s, SetarTree& tree, std::size_t depth) {
    if (s.head() != "node") throw ModelFormatError("expected node");
    const std::size_t id = tree.nodes.size();
    tree.nodes.push_back(TreeNode{});
    tree.nodes[id].depth = depth;
    const auto& body = s.at(1);
    if (body.head() == "leaf") {
        LeafModel leaf;
        leaf.n_train_rows = parse_count(body.text(1));
        leaf.fit.sse = parse_real(body.text(2));
        leaf.fit.rank = parse_count(body.text(3));
        const auto& beta = body.at(4);
        if (beta.head() != "beta") throw ModelFormatError("expected beta");
        leaf.fit.beta.resize(static_cast<Eigen::Index>(beta.items.size() - 1));
        for (std::size_t k = 1; k < beta.items.size(); ++k) {
            leaf.fit.beta(static_cast<Eigen::Index>(k - 1)) = parse_real(beta.text(k));
        }
        leaf.fit.n_obs = leaf.n_train_rows;
        leaf.fit.n_params = beta.items.size() - 1;
        if (leaf.fit.n_params != tree.layout.n_columns() + 1) throw ModelFormatError("leaf width does not match layout");
        tree.nodes[id].leaf = tree.leaves.size();
        tree.leaves.push_back(std::move(leaf));
        tree.summary.rows_per_leaf.push_back(tree.leaves.back().n_train_rows);
        tree.summary.depth_reached = std::max(tree.summary.depth_reached, depth);
        return id;
    }
    if (body.head() != "split") throw ModelFormatError("expected split or leaf");
    SplitDecision d;
    d.column_index = parse_count(body.text(1));
    if (d.column_index >= tree.layout.n_columns()) throw ModelFormatError("split column out of range");
    d.threshold = parse_real(body.text(2));
    d.left_sse = parse_real(body.text(3));
    d.right_sse = parse_real(body.text(4));
    d.total_sse = parse_real(body.text(5));
    d.left_count = parse_count(body.text(6));
    d.right_count = parse_count(body.text(7));
    tree.nodes[id].is_leaf = false;
    tree.nodes[id].decision = d;
    const std::size_t left = read_node(s.at(2), tree, depth + 1);
    const std::size_t right = read_node(s.at(3), tree, depth + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
}

inline void write_tree_body(std::ostream& os, const SetarTree& tree, int depth) {
    indent(os, depth);
    os << "(setar-tree " << kFormatVersion << "\n";
    write_layout(os, tree.layout, depth + 1);
    write_stopping(os, tree.config, depth + 1);
    write_node(os, tree, 0, depth + 1);
    indent(os, depth);
    os << ")\n";
}

inline SetarTree read_tree_body(const Sexp& s) {
    if (s.head() != "setar-tree") throw ModelFormatError("expected setar-tree");
    if (parse_count(s.text(1)) != static_cast<std::size_t>(kFormatVersion)) {
        throw ModelFormatError("unsupported format version " + s.text(1));
    }
    SetarTree tree;
    tree.layout = read_layout(s.at(2));
    tree.config = read_stopping(s.at(3));
    read_node(s.at(4), tree, 0);
    tree.summary.leaf_count = tree.leaves.size();
    return tree;
}

inline const char* randomization_name(Randomization r) {
    switch (r) {
    case Randomization::none:
        return "none";
    case Randomization::significance:
        return "significance";
    case Randomization::error_red:
        return "error-red";
    case Randomization::both:
        return "both";
    }
    return "both";
}

} // namespace detail

inline Randomization parse_randomization(const std::string& s) {
    if (s == "none") return Randomization::none;
    if (s == "significance") return Randomization::significance;
    if (s == "error-red" || s == "error_red") return Randomization::error_red;
    if (s == "both") return Randomization::both;
    throw UsageError("unknown randomization '" + s + "'");
}

inline std::string tree_to_string(const SetarTree& tree) {
    std::ostringstream os;
    detail::write_tree_body(os, tree, 0);
    return os.str();
}

inline SetarTree tree_from_string(std::string_view text) {
    SexpReader reader(text);
    auto s = reader.read();
    if (!reader.at_end()) throw ModelFormatError("trailing content");
    return detail::read_tree_body(s);
}

inline std::string forest_to_string(const SetarForest& forest) {
    const auto& c = forest.config;
    std::ostringstream os;
    os << "(setar-forest " << kFormatVersion << "\n";
    os << "  (config " << c.n_trees << ' ' << format_real(c.bagging_fraction) << ' '
       << format_real(c.feature_fraction) << ' ' << c.seed << ' ' << detail::randomization_name(c.randomization)
       << ' ' << (c.average_per_step ? "per-step" : "per-tree") << ")\n";
    os << "  (ranges " << format_real(c.alpha0_range.lo) << ' ' << format_real(c.alpha0_range.hi) << ' '
       << format_real(c.divider_range.lo) << ' ' << format_real(c.divider_range.hi) << ' '
       << format_real(c.error_threshold_range.lo) << ' ' << format_real(c.error_threshold_range.hi) << ")\n";
    detail::write_stopping(os, c.base, 1);
    os << "  (search " << c.search.grid_size << ' ' << c.search.min_child_size << ")\n";
    for (std::size_t i = 0; i < forest.trees.size(); ++i) {
        os << "  (member " << i << ' ' << forest.n_training_rows << " (columns";
        if (i < forest.feature_columns.size()) {
            for (const auto col : forest.feature_columns[i]) os << ' ' << col;
        }
        os << ")\n";
        detail::write_tree_body(os, forest.trees[i], 2);
        os << "  )\n";
    }
    os << ")\n";
    return os.str();
}

inline SetarForest forest_from_string(std::string_view text) {
    SexpReader reader(text);
    const auto s = reader.read();
    if (!reader.at_end()) throw ModelFormatError("trailing content");
    if (s.head() != "setar-forest") throw ModelFormatError("expected setar-forest");
    if (parse_count(s.text(1)) != static_cast<std::size_t>(kFormatVersion)) {
        throw ModelFormatError("unsupported format version " + s.text(1));
    }
    SetarForest forest;
    auto& c = forest.config;
    const auto& cfg = s.at(2);
    if (cfg.head() != "config") throw ModelFormatError("expected config");
    c.n_trees = parse_count(cfg.text(1));
    c.bagging_fraction = parse_real(cfg.text(2));
    c.feature_fraction = parse_real(cfg.text(3));
    c.seed = parse_count(cfg.text(4));
    c.randomization = parse_randomization(cfg.text(5));
    c.average_per_step = cfg.text(6) == "per-step";
    const auto& ranges = s.at(3);
    if (ranges.head() != "ranges") throw ModelFormatError("expected ranges");
    c.alpha0_range = {parse_real(ranges.text(1)), parse_real(ranges.text(2))};
    c.divider_range = {parse_real(ranges.text(3)), parse_real(ranges.text(4))};
    c.error_threshold_range = {parse_real(ranges.text(5)), parse_real(ranges.text(6))};
    c.base = detail::read_stopping(s.at(4));
    const auto& search = s.at(5);
    if (search.head() != "search") throw ModelFormatError("expected search");
    c.search.grid_size = parse_count(search.text(1));
    c.search.min_child_size = parse_count(search.text(2));
    for (std::size_t i = 6; i < s.items.size(); ++i) {
        const auto& member = s.items[i];
        if (member.head() != "member") throw ModelFormatError("expected member");
        const auto& cols = member.at(3);
        std::vector<std::size_t> columns;
        for (std::size_t k = 1; k < cols.items.size(); ++k) columns.push_back(parse_count(cols.text(k)));
        if (parse_count(member.text(1)) != forest.trees.size()) throw ModelFormatError("members out of order");
        forest.n_training_rows = parse_count(member.text(2));
        forest.trees.push_back(detail::read_tree_body(member.at(4)));
        forest.tree_configs.push_back(forest.trees.back().config);
        forest.row_samples.push_back(
            plan_tree(c, forest.trees.size() - 1, forest.n_training_rows, forest.trees.back().n_columns()).rows);
        forest.feature_columns.push_back(std::move(columns));
    }
    if (forest.trees.size() != c.n_trees) throw ModelFormatError("tree count does not match config");
    return forest;
}

/// Reads either model kind; returns true and fills `forest` for a forest file, otherwise fills `tree`.
inline bool read_model(std::string_view text, SetarTree& tree, SetarForest& forest) {
    SexpReader peek(text);
    const auto s = peek.read();
    if (s.head() == "setar-forest") {
        forest = forest_from_string(text);
        return true;
    }
    tree = tree_from_string(text);
    return false;
}

} // namespace setar::io
