#include "json_config.hpp"

#include <nlohmann/json.hpp>

namespace rndiff::cli {

namespace {

using nlohmann::json;

std::string scalar_text(const json& value, const std::string& key) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    if (value.is_number()) return value.dump();
    throw CLI::ConversionError("config key '" + key + "' must hold a scalar or a list of scalars");
}

void flatten(const json& node, const std::string& name, const std::vector<std::string>& parents,
             std::vector<CLI::ConfigItem>& items) {
    if (node.is_object()) {
        std::vector<std::string> next = parents;
        if (!name.empty()) next.push_back(name);
        for (auto it = node.begin(); it != node.end(); ++it) {
            flatten(*it, it.key(), next, items);
        }
        return;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (node.is_array()) {
        for (const json& element : node) item.inputs.push_back(scalar_text(element, name));
    } else {
        item.inputs.push_back(scalar_text(node, name));
    }
    items.push_back(std::move(item));
}

json option_value(const CLI::Option* opt, bool default_also) {
    std::vector<std::string> values = opt->reduced_results();
    if (values.empty() && default_also && !opt->get_default_str().empty()) {
        values = {opt->get_default_str()};
    }
    if (values.empty()) return nullptr;
    if (values.size() == 1) return values.front();
    return values;
}

json collect(const CLI::App* app, bool default_also) {
    json doc = json::object();
    for (const CLI::Option* opt : app->get_options()) {
        if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "help" || name == "config") continue;
        json value = option_value(opt, default_also);
        if (!value.is_null()) doc[name] = std::move(value);
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
        json child = collect(sub, default_also);
        if (!child.empty()) doc[sub->get_name()] = std::move(child);
    }
    return doc;
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
    return collect(app, default_also).dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
    json doc;
    try {
        input >> doc;
    } catch (const json::exception& e) {
        throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw CLI::ConversionError("config file must contain a JSON object");
    }
    std::vector<CLI::ConfigItem> items;
    flatten(doc, "", {}, items);
    return items;
}

}  // namespace rndiff::cli
