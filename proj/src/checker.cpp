#include "skeap/consistency/checker.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace skeap::consistency {

namespace {

using HeapKey = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::size_t>;

HeapKey heap_key(const History& h, std::size_t record, std::size_t position) {
    const Element& e = h.records[record].element;
    if (h.tie_policy == TiePolicy::insertion_order) return {e.priority, position, 0, record};
    return {e.priority, e.origin, e.seq, record};
}

std::string describe(const History& h, std::size_t i) {
    const auto& r = h.records[i];
    std::string s = (r.kind == OpKind::insert ? "Ins" : "Del");
    s += "(node=" + std::to_string(r.node) + ",seq=" + std::to_string(r.seq);
    if (r.kind == OpKind::insert) s += ",e=" + to_string(r.element);
    return s + ")";
}

std::string describe_return(const std::optional<Element>& e) { return e ? to_string(*e) : std::string("bottom"); }

bool is_permutation_of_records(const History& h, std::span<const std::size_t> order) {
    if (order.size() != h.records.size()) return false;
    std::vector<bool> seen(order.size(), false);
    for (auto i : order) {
        if (i >= seen.size() || seen[i]) return false;
        seen[i] = true;
    }
    return true;
}

// The matching M as recorded by the protocol: delete record -> insert record.
struct RecordedMatching {
    std::vector<std::optional<std::size_t>> insert_of;  // by delete record
    std::vector<std::optional<std::size_t>> delete_of;  // by insert record
    std::string error;
    std::vector<std::size_t> error_records;
};

RecordedMatching recorded_matching(const History& h) {
    RecordedMatching m;
    m.insert_of.assign(h.records.size(), std::nullopt);
    m.delete_of.assign(h.records.size(), std::nullopt);
    std::map<Element, std::size_t> by_element;
    for (std::size_t i = 0; i < h.records.size(); ++i) {
        if (h.records[i].kind == OpKind::insert && !by_element.emplace(h.records[i].element, i).second) {
            m.error = "element inserted twice: " + describe(h, i);
            m.error_records = {by_element[h.records[i].element], i};
            return m;
        }
    }
    for (std::size_t i = 0; i < h.records.size(); ++i) {
        const auto& r = h.records[i];
        if (r.kind != OpKind::deletemin || !r.returned) continue;
        auto it = by_element.find(*r.returned);
        if (it == by_element.end()) {
            m.error = describe(h, i) + " returned never-inserted element " + to_string(*r.returned);
            m.error_records = {i};
            return m;
        }
        if (m.delete_of[it->second]) {
            m.error = "element " + to_string(*r.returned) + " returned twice";
            m.error_records = {it->second, *m.delete_of[it->second], i};
            return m;
        }
        m.delete_of[it->second] = i;
        m.insert_of[i] = it->second;
    }
    return m;
}

CheckResult fail(std::string what, std::vector<std::size_t> records) {
    CheckResult r;
    r.pass = false;
    r.violation = std::move(what);
    r.records = std::move(records);
    return r;
}

}  // namespace

OracleResult sequential_oracle(const History& h, std::span<const std::size_t> order) {
    OracleResult out;
    out.returned.assign(h.records.size(), std::nullopt);
    std::set<HeapKey> heap;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        if (h.records[i].kind == OpKind::insert) {
            heap.insert(heap_key(h, i, pos));
        } else if (!heap.empty()) {
            const std::size_t ins = std::get<3>(*heap.begin());
            heap.erase(heap.begin());
            out.returned[i] = h.records[ins].element;
            out.matching.emplace_back(ins, i);
        }
    }
    return out;
}

CheckResult check_serializable(const History& h, std::span<const std::size_t> order) {
    if (!is_permutation_of_records(h, order)) return fail("order is not a permutation of the history", {});
    const auto recorded = recorded_matching(h);
    if (!recorded.error.empty()) return fail(recorded.error, recorded.error_records);
    const auto oracle = sequential_oracle(h, order);
    for (std::size_t i : order) {
        const auto& r = h.records[i];
        if (r.kind != OpKind::deletemin) continue;
        if (oracle.returned[i] != r.returned) {
            return fail(describe(h, i) + " returned " + describe_return(r.returned) + " but the serial execution returns " +
                            describe_return(oracle.returned[i]),
                        {i});
        }
    }
    return {};
}

CheckResult check_local_consistency(const History& h, std::span<const std::size_t> order) {
    if (!is_permutation_of_records(h, order)) return fail("order is not a permutation of the history", {});
    std::map<NodeId, std::pair<std::uint64_t, std::size_t>> last;  // node -> (seq, record)
    for (std::size_t i : order) {
        const auto& r = h.records[i];
        auto it = last.find(r.node);
        if (it != last.end() && it->second.first >= r.seq) {
            return fail(describe(h, i) + " is ordered after " + describe(h, it->second.second), {it->second.second, i});
        }
        last[r.node] = {r.seq, i};
    }
    return {};
}

CheckResult check_heap_consistency(const History& h, std::span<const std::size_t> order) {
    if (!is_permutation_of_records(h, order)) return fail("order is not a permutation of the history", {});
    const auto m = recorded_matching(h);
    if (!m.error.empty()) return fail(m.error, m.error_records);
    const std::size_t n = order.size();
    std::vector<std::size_t> at(n);
    for (std::size_t pos = 0; pos < n; ++pos) at[order[pos]] = pos;

    // prefix counts of unmatched deletes, prefix minimum priority of unmatched inserts
    std::vector<std::size_t> unmatched_dels(n + 1, 0);
    std::vector<std::uint64_t> min_unmatched_prio(n + 1, std::numeric_limits<std::uint64_t>::max());
    std::vector<std::size_t> min_unmatched_rec(n + 1, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = order[pos];
        const auto& r = h.records[i];
        unmatched_dels[pos + 1] = unmatched_dels[pos] + (r.kind == OpKind::deletemin && !m.insert_of[i] ? 1 : 0);
        min_unmatched_prio[pos + 1] = min_unmatched_prio[pos];
        min_unmatched_rec[pos + 1] = min_unmatched_rec[pos];
        if (r.kind == OpKind::insert && !m.delete_of[i] && r.element.priority < min_unmatched_prio[pos]) {
            min_unmatched_prio[pos + 1] = r.element.priority;
            min_unmatched_rec[pos + 1] = i;
        }
    }

    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t del = order[pos];
        if (!m.insert_of[del]) continue;
        const std::size_t ins = *m.insert_of[del];
        if (at[ins] > pos) {
            return fail("property 1: " + describe(h, del) + " precedes its matched " + describe(h, ins), {del, ins});
        }
        if (unmatched_dels[pos] - unmatched_dels[at[ins] + 1] > 0) {
            std::size_t culprit = del;
            for (std::size_t q = at[ins] + 1; q < pos; ++q) {
                if (h.records[order[q]].kind == OpKind::deletemin && !m.insert_of[order[q]]) {
                    culprit = order[q];
                    break;
                }
            }
            return fail("property 2: unmatched " + describe(h, culprit) + " lies between " + describe(h, ins) + " and " +
                            describe(h, del),
                        {ins, culprit, del});
        }
        if (min_unmatched_prio[pos] < h.records[ins].element.priority) {
            const std::size_t culprit = min_unmatched_rec[pos];
            return fail("property 3: unmatched " + describe(h, culprit) + " has smaller priority than " +
                            describe(h, ins) + " matched by " + describe(h, del),
                        {culprit, ins, del});
        }
    }
    return {};
}

Order serial_order(const History& h) {
    Order order(h.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return h.records[a].serial_index < h.records[b].serial_index; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (h.records[order[i]].serial_index == h.records[order[i - 1]].serial_index) {
            throw std::invalid_argument("duplicate serial index " + std::to_string(h.records[order[i]].serial_index));
        }
    }
    return order;
}

std::optional<Order> brute_force_order(const History& h, bool require_local, std::size_t max_ops) {
    const std::size_t n = h.records.size();
    if (n > max_ops) throw std::invalid_argument("history too long for exhaustive search");
    if (!recorded_matching(h).error.empty()) return std::nullopt;

    Order order;
    std::vector<bool> used(n, false);
    std::set<HeapKey> heap;
    std::optional<Order> found;

    // Depth-first over prefixes; a prefix survives only while the serial replay reproduces
    // every recorded return, so matched deletes can never precede their inserts.
    std::function<void()> search = [&]() {
        if (found) return;
        if (order.size() == n) {
            if (check_heap_consistency(h, order) && (!require_local || check_local_consistency(h, order))) {
                found = order;
            }
            return;
        }
        for (std::size_t i = 0; i < n && !found; ++i) {
            if (used[i]) continue;
            const auto& r = h.records[i];
            const std::size_t pos = order.size();
            if (r.kind == OpKind::insert) {
                const HeapKey key = heap_key(h, i, pos);
                heap.insert(key);
                used[i] = true;
                order.push_back(i);
                search();
                order.pop_back();
                used[i] = false;
                heap.erase(key);
            } else {
                std::optional<HeapKey> top;
                if (!heap.empty()) top = *heap.begin();
                const std::optional<Element> got =
                    top ? std::optional<Element>(h.records[std::get<3>(*top)].element) : std::nullopt;
                if (got != r.returned) continue;
                if (top) heap.erase(heap.begin());
                used[i] = true;
                order.push_back(i);
                search();
                order.pop_back();
                used[i] = false;
                if (top) heap.insert(*top);
            }
        }
    };
    search();
    return found;
}

Verdict evaluate(const History& h, std::span<const std::size_t> order) {
    Verdict v;
    const auto s = check_serializable(h, order);
    const auto l = check_local_consistency(h, order);
    const auto c = check_heap_consistency(h, order);
    v.serializable = s.pass;
    v.locally_consistent = l.pass;
    v.heap_consistent = c.pass;
    for (const auto* r : {&s, &c, &l}) {
        if (!r->pass) {
            v.violation = r->violation;
            break;
        }
    }
    return v;
}

nlohmann::json to_json(const Verdict& v) {
    nlohmann::json j = {{"serializable", v.serializable},
                        {"locally_consistent", v.locally_consistent},
                        {"heap_consistent", v.heap_consistent}};
    if (!v.violation.empty()) j["violation"] = v.violation;
    return j;
}

}  // namespace skeap::consistency
