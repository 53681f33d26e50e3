#!/usr/bin/env node
import { main } from "./cli";

process.exit(main("plot-rate", process.argv.slice(2)));
