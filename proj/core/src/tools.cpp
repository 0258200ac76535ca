#include "clinigym/tools.hpp"

#include <algorithm>

#include "clinigym/errors.hpp"
#include "clinigym/knowledge.hpp"
#include "clinigym/rng.hpp"

namespace clinigym {

std::string_view to_string(ToolType t) {
    switch (t) {
        case ToolType::READ: return "READ";
        case ToolType::WRITE: return "WRITE";
        case ToolType::THINK: return "THINK";
        case ToolType::GENERIC: return "GENERIC";
    }
    return "READ";
}

ToolResult ToolResult::success(nlohmann::json payload) {
    ToolResult r;
    r.ok = true;
    r.payload = std::move(payload);
    return r;
}

ToolResult ToolResult::failure(std::string message) {
    ToolResult r;
    r.ok = false;
    r.error_message = std::move(message);
    return r;
}

std::string ToolResult::to_text() const {
    if (!ok) return "ERROR: " + error_message;
    return payload.dump();
}

PatientRecord* WorldState::find_patient(std::string_view id) {
    for (auto& p : patients)
        if (p.id == id) return &p;
    return nullptr;
}

const PatientRecord* WorldState::find_patient(std::string_view id) const {
    for (const auto& p : patients)
        if (p.id == id) return &p;
    return nullptr;
}

std::uint64_t WorldState::state_hash() const {
    nlohmann::json j;
    j["domain"] = domain;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : patients) {
        nlohmann::json pj;
        pj["id"] = p.id;
        pj["name"] = p.name;
        pj["age"] = p.age;
        pj["sex"] = p.sex;
        nlohmann::json all = nlohmann::json::array();
        for (const auto& a : p.allergies) all.push_back({{"s", a.substance}, {"sev", a.severity}});
        pj["allergies"] = all;
        pj["conditions"] = p.conditions;
        pj["medications"] = p.medications;
        pj["vitals"] = p.vitals;
        nlohmann::json labs = nlohmann::json::array();
        for (const auto& l : p.labs) {
            labs.push_back({{"n", l.name}, {"v", l.value}, {"u", l.unit}, {"f", l.flag}});
        }
        pj["labs"] = labs;
        pj["note"] = p.note;
        pts.push_back(std::move(pj));
    }
    j["patients"] = std::move(pts);
    nlohmann::json form = nlohmann::json::object();
    for (const auto& [name, ref] : formulary) {
        form[name] = {{"class", ref.drug_class},
                      {"dose", ref.typical_dose_mg},
                      {"interacts", ref.interacts_with}};
    }
    j["formulary"] = std::move(form);
    j["facts"] = facts;
    j["hidden_answer"] = hidden_answer;
    j["fact_looked_up"] = fact_looked_up;
    j["case_assessed"] = case_assessed;
    j["ordered_labs"] = ordered_labs;
    j["prescriptions"] = prescriptions;
    j["clinical_notes"] = clinical_notes;
    j["mutation_log"] = mutation_log;
    if (knowledge) {
        nlohmann::json ids = nlohmann::json::array();
        for (const auto& p : knowledge->passages()) ids.push_back(p.doc_id);
        j["knowledge_docs"] = std::move(ids);
    }
    return fnv1a(j.dump());
}

ToolKit& ToolKit::register_tool(ToolDefinition def, Handler handler) {
    if (tools_.contains(def.name)) {
        throw ContractError("tool '" + def.name + "' already registered in toolkit '" + domain_ +
                            "'");
    }
    if (!handler) throw ContractError("tool '" + def.name + "' registered without a handler");
    std::string name = def.name;
    tools_.emplace(std::move(name), Entry{std::move(def), std::move(handler)});
    return *this;
}

bool ToolKit::has(std::string_view name) const { return tools_.find(name) != tools_.end(); }

const ToolDefinition* ToolKit::find(std::string_view name) const {
    auto it = tools_.find(name);
    return it == tools_.end() ? nullptr : &it->second.def;
}

std::vector<const ToolDefinition*> ToolKit::definitions() const {
    std::vector<const ToolDefinition*> out;
    out.reserve(tools_.size());
    for (const auto& [name, entry] : tools_) out.push_back(&entry.def);
    return out;  // std::map iteration is already name-ordered
}

nlohmann::json ToolKit::schemas() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [name, entry] : tools_) {
        const ToolDefinition& def = entry.def;
        nlohmann::json props = nlohmann::json::object();
        nlohmann::json required = nlohmann::json::array();
        for (const auto& p : def.parameters) {
            props[p.name] = {{"type", p.type}, {"description", p.description}};
            if (p.required) required.push_back(p.name);
        }
        arr.push_back({{"type", "function"},
                       {"function",
                        {{"name", def.name},
                         {"description", def.description},
                         {"tool_type", std::string(to_string(def.type))},
                         {"parameters",
                          {{"type", "object"},
                           {"properties", std::move(props)},
                           {"required", std::move(required)}}}}}});
    }
    return arr;
}

ToolResult ToolKit::dispatch(std::string_view name, const nlohmann::json& args,
                             WorldState& world) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) {
        return ToolResult::failure("unknown tool '" + std::string(name) + "'");
    }
    const ToolDefinition& def = it->second.def;
    if (!args.is_object() && !args.is_null()) {
        return ToolResult::failure("arguments for '" + def.name + "' must be a JSON object");
    }
    nlohmann::json clean = nlohmann::json::object();
    std::vector<std::string> warnings;
    if (args.is_object()) {
        for (const auto& [key, value] : args.items()) {
            const ParamSpec* spec = nullptr;
            for (const auto& p : def.parameters) {
                if (p.name == key) {
                    spec = &p;
                    break;
                }
            }
            if (spec == nullptr) {
                warnings.push_back("ignored unknown argument '" + key + "'");
            } else {
                clean[key] = value;
            }
        }
    }
    for (const auto& p : def.parameters) {
        if (p.required && !clean.contains(p.name)) {
            return ToolResult::failure("missing required argument '" + p.name + "' for '" +
                                       def.name + "'");
        }
    }
    ToolResult result = it->second.handler(clean, world);
    if (result.ok && !warnings.empty()) {
        if (!result.payload.is_object()) {
            result.payload = nlohmann::json{{"value", std::move(result.payload)}};
        }
        result.payload["warnings"] = warnings;
    }
    if (result.ok && def.type == ToolType::WRITE) {
        world.mutation_log.push_back(def.name + " " + clean.dump());
    }
    return result;
}

ToolKit ToolKit::merge(const std::vector<ToolKit>& kits) {
    if (kits.empty()) throw ContractError("merge: toolkit list must be non-empty");
    ToolKit merged(kits.front().domain_);
    for (const auto& kit : kits) {
        for (const auto& [name, entry] : kit.tools_) {
            if (!merged.tools_.contains(name)) {
                merged.tools_.emplace(name, entry);
            }
        }
    }
    return merged;
}

std::string schema_document(const ToolKit& kit) { return kit.schemas().dump(2) + "\n"; }

}  // namespace clinigym
