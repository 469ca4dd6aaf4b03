#include "fixtures.hpp"
#include "panelms/csv.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <output dir>\n";
        return 2;
    }
    const std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir);
    for (const auto& f : fixtures::all()) {
        const auto sim = panelms::generate_panel(f.spec);
        panelms::panel_to_csv(sim.panel, dir / f.file, panelms::CsvLayout::Long);
        std::cout << "wrote " << (dir / f.file).string() << '\n';
    }
    return 0;
}
