#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lek/core/graph.hpp"
#include "lek/core/tensor.hpp"

namespace lek::core {

// Ordered named parameter set. Order is fixed at insertion so checkpoints
// and SGD traversal are deterministic.
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor t) {
        items_.emplace_back(name, std::move(t));
        return items_.back().second;
    }

    Tensor& get(const std::string& name) {
        for (auto& [n, t] : items_)
            if (n == name) return t;
        throw Error("ParamStore: unknown parameter '" + name + "'");
    }

    const Tensor& get(const std::string& name) const {
        for (const auto& [n, t] : items_)
            if (n == name) return t;
        throw Error("ParamStore: unknown parameter '" + name + "'");
    }

    bool has(const std::string& name) const {
        for (const auto& [n, t] : items_)
            if (n == name) return true;
        return false;
    }

    std::vector<std::pair<std::string, Tensor>>& items() { return items_; }
    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }

    bool all_finite() const {
        for (const auto& [n, t] : items_)
            if (!t.all_finite()) return false;
        return true;
    }

    long total_size() const {
        long s = 0;
        for (const auto& [n, t] : items_) s += t.size();
        return s;
    }

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

// Parameters bound into a graph for one step.
class BoundParams {
public:
    BoundParams() = default;

    BoundParams(Graph& g, const ParamStore& store, bool requires_grad) {
        for (const auto& [name, t] : store.items())
            vars_.emplace_back(name, g.input(t, requires_grad));
    }

    Var at(const std::string& name) const {
        for (const auto& [n, v] : vars_)
            if (n == name) return v;
        throw Error("BoundParams: unknown parameter '" + name + "'");
    }

    const std::vector<std::pair<std::string, Var>>& vars() const { return vars_; }

private:
    std::vector<std::pair<std::string, Var>> vars_;
};

// Plain gradient-descent update over every bound parameter. Parameters that
// did not participate in the loss carry no gradient and are left untouched.
inline void sgd_step(ParamStore& store, const BoundParams& bound, const Graph& g, double lr) {
    for (const auto& [name, var] : bound.vars()) {
        if (!g.has_grad(var)) continue;
        Tensor& t = store.get(name);
        const Tensor& grad = g.grad(var);
        for (long i = 0; i < t.size(); ++i) t.at(i) -= lr * grad.at(i);
    }
}

} // namespace lek::core
