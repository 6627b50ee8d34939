#pragma once

#include "gigamae/model.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace gigamae {

// A checkpoint is a directory: one .emb tensor per parameter plus a
// manifest.txt recording the architecture and the originating config hash.
template <typename S>
void save_model(const std::string& dir, Model<S>& model, const std::vector<int>& target_dims,
                int heads, const std::string& config_hash) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw std::runtime_error("save_model: cannot write manifest in " + dir);
    mf << "# gigamae checkpoint v1\n";
    mf << "in_dim = " << model.in_dim << "\n";
    mf << "hidden_dim = " << model.hidden_dim << "\n";
    mf << "out_dim = " << model.out_dim << "\n";
    mf << "heads = " << heads << "\n";
    mf << "target_dims =";
    for (int d : target_dims) mf << " " << d;
    mf << "\nsubsets =";
    for (const auto& sub : model.subsets) mf << " " << subset_key(sub);
    mf << "\nconfig_hash = " << config_hash << "\n";
    for (auto& [name, mat] : model.params()) {
        mf << "param = " << name << " " << mat->rows << " " << mat->cols << "\n";
        write_embedding((fs::path(dir) / (name + ".emb")).string(),
                        EmbeddingMatrix::from_mat(name, mat->template cast<double>()));
    }
}

template <typename S>
struct LoadedModel {
    Model<S> model;
    std::vector<int> target_dims;
    int heads = 4;
    std::string config_hash;
};

template <typename S>
LoadedModel<S> load_model(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw std::runtime_error("load_model: missing manifest in " + dir);
    int in_dim = 0, hidden_dim = 0, out_dim = 0, heads = 4;
    std::vector<int> target_dims;
    std::vector<std::vector<int>> subsets;
    std::string config_hash;
    std::vector<std::string> param_names;
    std::string line;
    while (std::getline(mf, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("load_model: malformed manifest line: " + line);
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto e = s.find_last_not_of(" \t");
            s.erase(e == std::string::npos ? 0 : e + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        std::istringstream vs(val);
        if (key == "in_dim") vs >> in_dim;
        else if (key == "hidden_dim") vs >> hidden_dim;
        else if (key == "out_dim") vs >> out_dim;
        else if (key == "heads") vs >> heads;
        else if (key == "config_hash") config_hash = val;
        else if (key == "target_dims") {
            int d;
            while (vs >> d) target_dims.push_back(d);
        } else if (key == "subsets") {
            std::string tok;
            while (vs >> tok) {
                std::vector<int> sub;
                std::istringstream ts(tok);
                std::string part;
                while (std::getline(ts, part, '+')) sub.push_back(std::stoi(part));
                subsets.push_back(std::move(sub));
            }
        } else if (key == "param") {
            std::string name;
            vs >> name;
            param_names.push_back(name);
        } else {
            throw std::runtime_error("load_model: unknown manifest key: " + key);
        }
    }
    if (in_dim < 1 || hidden_dim < 1 || out_dim < 1 || subsets.empty())
        throw std::runtime_error("load_model: incomplete manifest in " + dir);

    LoadedModel<S> out;
    out.model = Model<S>::init(in_dim, hidden_dim, out_dim, target_dims, subsets, 0, heads);
    out.target_dims = target_dims;
    out.heads = heads;
    out.config_hash = config_hash;
    for (auto& [name, mat] : out.model.params()) {
        auto emb = read_embedding((fs::path(dir) / (name + ".emb")).string());
        if (emb.rows != mat->rows || emb.cols != mat->cols)
            throw std::runtime_error("load_model: shape mismatch for parameter " + name);
        *mat = emb.to_mat().template cast<S>();
    }
    (void)param_names;
    return out;
}

}  // namespace gigamae
