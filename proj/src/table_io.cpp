#include "hqas/table_io.hpp"

#include <algorithm>
#include <sstream>

#include "hqas/errors.hpp"

namespace hqas {

namespace {

std::string label_text(const Label& l) { return std::to_string(l.first) + ":" + std::to_string(l.second); }

Label parse_label(const std::string& text) {
    auto colon = text.find(':');
    try {
        if (colon == std::string::npos) return Label{1, std::stoi(text)};
        return Label{std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        fail("BadInput", "cannot parse label '" + text + "'");
    }
}

Rat parse_value(const json& v) {
    try {
        if (v.is_string()) return parse_rat(v.get<std::string>());
        if (v.is_number_integer()) return Rat(v.get<long>());
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
    }
    fail("BadInput", "rational values must be strings \"p/q\" or integers");
}

HalfInt parse_genus(const json& v) {
    if (v.is_string()) return parse_halfint(v.get<std::string>());
    if (v.is_number_integer()) return HalfInt::from_int(v.get<int>());
    fail("BadInput", "genus must be a string \"p/2\" or an integer");
}

bool single_component(const FTable& t) {
    for (const auto& [k, v] : t.entries)
        for (const auto& l : k.idx)
            if (l.first != 1) return false;
    return true;
}

const json& field(const json& doc, const char* name) {
    if (!doc.is_object() || !doc.contains(name)) fail("BadInput", std::string("missing field '") + name + "'");
    return doc.at(name);
}

}  // namespace

std::vector<std::pair<FKey, Rat>> ordered_entries(const FTable& table) {
    std::vector<std::pair<FKey, Rat>> out(table.entries.begin(), table.entries.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first.g2 != b.first.g2) return a.first.g2 < b.first.g2;
        if (a.first.idx.size() != b.first.idx.size()) return a.first.idx.size() < b.first.idx.size();
        return a.first.idx < b.first.idx;
    });
    return out;
}

json table_to_json(const FTable& table) {
    json doc;
    doc["chi_max"] = table.chi_max;
    doc["q_max"] = table.q_max;
    doc["crosscapped"] = table.crosscapped;
    if (table.support) {
        json w = json::object();
        for (const auto& [a, v] : table.support->weights) w[std::to_string(a)] = to_string(v);
        doc["support"] = w;
    }
    const bool plain = single_component(table);
    json entries = json::array();
    for (const auto& [k, v] : ordered_entries(table)) {
        json idx = json::array();
        for (const auto& l : k.idx) {
            if (plain)
                idx.push_back(l.second);
            else
                idx.push_back(label_text(l));
        }
        entries.push_back({{"g", to_string(HalfInt{k.g2})}, {"idx", idx}, {"value", to_string(v)}});
    }
    doc["entries"] = entries;
    return doc;
}

FTable table_from_json(const json& doc) {
    FTable t;
    try {
        t.chi_max = field(doc, "chi_max").get<int>();
        t.q_max = field(doc, "q_max").get<int>();
        if (doc.contains("crosscapped")) t.crosscapped = doc.at("crosscapped").get<bool>();
        if (doc.contains("support")) {
            SupportBound sb;
            for (const auto& [a, w] : doc.at("support").items()) sb.weights[std::stoi(a)] = parse_value(w);
            t.support = sb;
        }
        for (const auto& e : field(doc, "entries")) {
            HalfInt g = parse_genus(field(e, "g"));
            std::vector<Label> idx;
            for (const auto& l : field(e, "idx")) {
                if (l.is_number_integer())
                    idx.push_back(Label{1, l.get<int>()});
                else if (l.is_string())
                    idx.push_back(parse_label(l.get<std::string>()));
                else
                    fail("BadInput", "labels must be integers or \"alpha:q\" strings");
            }
            if (e.contains("n") && e.at("n").get<size_t>() != idx.size()) fail("BadInput", "n disagrees with idx");
            t.set(g.doubled, idx, parse_value(field(e, "value")));
        }
    } catch (const json::exception& ex) {
        fail("BadInput", std::string("malformed table: ") + ex.what());
    }
    return t;
}

std::string table_to_json_text(const FTable& table) {
    json doc = table_to_json(table);
    json entries = doc["entries"];
    doc.erase("entries");
    std::string head = doc.dump();
    head.pop_back();
    std::string out = head + (doc.empty() ? "" : ",") + "\"entries\":[";
    for (size_t i = 0; i < entries.size(); ++i) out += std::string(i ? "," : "") + "\n" + entries[i].dump();
    return out + (entries.empty() ? "" : "\n") + "]}\n";
}

std::string table_to_csv(const FTable& table) {
    std::ostringstream out;
    out << "g,n,idx,value\n";
    for (const auto& [k, v] : ordered_entries(table)) {
        std::string idx;
        for (size_t i = 0; i < k.idx.size(); ++i) idx += (i ? ";" : "") + label_text(k.idx[i]);
        out << to_string(HalfInt{k.g2}) << "," << k.idx.size() << "," << idx << "," << to_string(v) << "\n";
    }
    return out.str();
}

FTable table_from_csv(const std::string& text) {
    FTable t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "g,n,idx,value") fail("BadInput", "missing CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cols.push_back(c);
        if (cols.size() != 4) fail("BadInput", "CSV rows need four columns");
        std::vector<Label> idx;
        std::stringstream is(cols[2]);
        while (std::getline(is, c, ';'))
            if (!c.empty()) idx.push_back(parse_label(c));
        if (std::to_string(idx.size()) != cols[1]) fail("BadInput", "n disagrees with idx");
        t.set(parse_halfint(cols[0]).doubled, idx, parse_rat(cols[3]));
    }
    return t;
}

LocalCurve curve_from_json(const json& doc) {
    LocalCurve c;
    try {
        for (const auto& comp : field(doc, "components")) {
            CurveComponent cc;
            cc.r = field(comp, "r").get<int>();
            for (const auto& [l, v] : field(comp, "tau").items()) {
                int level = 0;
                try {
                    level = std::stoi(l);
                } catch (const std::exception&) {
                    fail("BadInput", "tau keys must be integer levels");
                }
                cc.tau[level] = parse_value(v);
            }
            c.components.push_back(std::move(cc));
        }
        std::vector<std::tuple<Label, Label, Rat>> phi;
        if (doc.contains("phi"))
            for (const auto& e : doc.at("phi")) {
                auto a = field(e, "a");
                auto b = field(e, "b");
                if (a.size() != 2 || b.size() != 2) fail("BadInput", "phi labels are [alpha, level] pairs");
                phi.emplace_back(Label{a[0].get<int>(), a[1].get<int>()}, Label{b[0].get<int>(), b[1].get<int>()},
                                 parse_value(field(e, "value")));
            }
        c.phi = Polarization::from_unordered(phi);
    } catch (const json::exception& ex) {
        fail("BadInput", std::string("malformed curve: ") + ex.what());
    }
    validate_curve(c);
    return c;
}

json curve_to_json(const LocalCurve& curve) {
    json comps = json::array();
    for (const auto& c : curve.components) {
        json tau = json::object();
        for (const auto& [l, v] : c.tau) tau[std::to_string(l)] = to_string(v);
        comps.push_back({{"r", c.r}, {"tau", tau}});
    }
    json phi = json::array();
    for (const auto& [key, v] : curve.phi.entries()) {
        if (key.second < key.first) continue;
        phi.push_back({{"a", {key.first.first, key.first.second}},
                       {"b", {key.second.first, key.second.second}},
                       {"value", to_string(v)}});
    }
    return json{{"components", comps}, {"phi", phi}};
}

}  // namespace hqas
