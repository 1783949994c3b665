// Mines the two-project toy corpus over every couple of versions and keeps
// the candidates that the sample knowledge base validates.
//
//   example_toy samples/toy/corpus.snaplog samples/toy/kb.csv

#include <fstream>
#include <iostream>

#include "migmine.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: example_toy <corpus.snaplog> <kb.csv>\n";
        return 1;
    }
    std::ifstream corpus_in(argv[1]);
    const auto histories = migmine::parse_snapshot_log(corpus_in);
    const auto kb = migmine::load_knowledge(argv[2]);

    std::vector<migmine::Migration> candidates;
    for (const auto& h : histories)
        for (const auto& couple : migmine::all_couples(h)) {
            auto found = migmine::generate_candidates(migmine::diff_deps(h, couple));
            std::cout << h.project().str() << " (" << couple.first << "," << couple.second << "):";
            for (const auto& m : found) std::cout << " " << m.source.artifact() << "->" << m.target.artifact();
            std::cout << "\n";
            candidates.insert(candidates.end(), found.begin(), found.end());
        }

    const migmine::KnowledgeGraphs graphs(kb);
    std::cout << "validated:\n";
    for (const auto& m : migmine::validate_migrations(candidates, graphs))
        std::cout << "  " << m.project.str() << " " << m.from_index << "->" << m.to_index << " "
                  << m.source.artifact() << " -> " << m.target.artifact() << "\n";
}
