#include "skeap/consistency/history_io.hpp"

#include <stdexcept>
#include <string>

namespace skeap::consistency {

namespace {

nlohmann::json element_json(const Element& e) {
    return {{"priority", e.priority}, {"origin", e.origin}, {"seq", e.seq}};
}

Element element_from(const nlohmann::json& j) {
    Element e;
    e.priority = j.at("priority").get<std::uint64_t>();
    e.origin = j.at("origin").get<NodeId>();
    e.seq = j.at("seq").get<std::uint64_t>();
    return e;
}

}  // namespace

nlohmann::json to_json(const OperationRecord& r) {
    nlohmann::json j = {{"node", r.node},
                        {"seq", r.seq},
                        {"kind", r.kind == OpKind::insert ? "insert" : "deletemin"},
                        {"serial_index", r.serial_index},
                        {"epoch", r.epoch}};
    if (r.kind == OpKind::insert) {
        j["priority"] = r.element.priority;
        j["element"] = element_json(r.element);
    } else {
        j["returned"] = r.returned ? element_json(*r.returned) : nlohmann::json(nullptr);
    }
    if (r.assigned_bottom) {
        j["assigned"] = "bottom";
    } else {
        j["assigned"] = {{"p", r.assigned_priority}, {"pos", r.assigned_position}};
    }
    return j;
}

OperationRecord record_from_json(const nlohmann::json& j) {
    OperationRecord r;
    r.node = j.at("node").get<NodeId>();
    r.seq = j.at("seq").get<std::uint64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "insert") {
        r.kind = OpKind::insert;
        r.element = element_from(j.at("element"));
    } else if (kind == "deletemin") {
        r.kind = OpKind::deletemin;
        if (j.contains("returned") && !j.at("returned").is_null()) r.returned = element_from(j.at("returned"));
    } else {
        throw std::invalid_argument("unknown record kind " + kind);
    }
    r.serial_index = j.at("serial_index").get<std::uint64_t>();
    r.epoch = j.value("epoch", std::uint64_t{0});
    if (j.contains("assigned")) {
        const auto& a = j.at("assigned");
        if (a.is_string()) {
            r.assigned_bottom = true;
        } else {
            r.assigned_priority = a.at("p").get<std::uint64_t>();
            r.assigned_position = a.at("pos").get<std::uint64_t>();
        }
    }
    return r;
}

void write_history(std::ostream& out, const History& h) {
    out << nlohmann::json{{"tie_policy", h.tie_policy == TiePolicy::element_order ? "element_order" : "insertion_order"}}
               .dump()
        << '\n';
    for (const auto& r : h.records) out << to_json(r).dump() << '\n';
}

History read_history(std::istream& in) {
    History h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        if (j.contains("tie_policy")) {
            const auto p = j.at("tie_policy").get<std::string>();
            if (p == "element_order") h.tie_policy = TiePolicy::element_order;
            else if (p == "insertion_order") h.tie_policy = TiePolicy::insertion_order;
            else throw std::invalid_argument("unknown tie policy " + p);
            continue;
        }
        h.records.push_back(record_from_json(j));
    }
    return h;
}

}  // namespace skeap::consistency
