"""
Pruning Summary Report Formatter
================================

Formats the aggregated results of a pruning experiment as a Markdown table
(one block per reservoir size, one row per centrality measure) or as JSON.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

logger = logging.getLogger(__name__)

TABLE_HEADER = "| Methods | Initial N (NRMSE) | Optimal N (NRMSE) | Reduced Error (%) | Smallest N |"
TABLE_RULE = "|---|---|---|---|---|"


class SummaryReportFormatter:
    """
    Formats experiment summaries into various output formats
    """

    def __init__(self, precision: int = 6):
        """
        Initialize formatter

        Args:
            precision: Decimal places for NRMSE values in Markdown tables
        """
        self.precision = precision

    def generate_report(self, summary: Dict[str, Any], format: str = 'markdown') -> str:
        """
        Generate summary report in specified format

        Args:
            summary: Summary produced by experiment_runner.build_summary
            format: Output format ('markdown', 'json')

        Returns:
            Formatted report string
        """
        if format.lower() == 'markdown':
            return self._generate_markdown(summary)
        elif format.lower() == 'json':
            return self._generate_json(summary)
        else:
            raise ValueError(f"Unsupported format: {format}")

    def format_row(self, row: Dict[str, Any]) -> str:
        """One Markdown table row; the reduced error is '--' when pruning did not help"""
        p = self.precision
        if row['optimal_n'] == row['initial_n']:
            reduced = "--"
        else:
            reduced = f"{row['reduced_error_pct']:.1f}"
        return (
            f"| {row['measure']} "
            f"| {row['initial_n']} ({row['initial_nrmse']:.{p}f}) "
            f"| {row['optimal_n']} ({row['optimal_nrmse']:.{p}f}) "
            f"| {reduced} "
            f"| {row['smallest_n']} |"
        )

    def _generate_markdown(self, summary: Dict[str, Any]) -> str:
        """Generate Markdown format report"""
        report: List[str] = []

        report.append("# Reservoir Pruning Summary")
        report.append("")
        report.append(f"**Dataset:** {summary.get('dataset', 'N/A')}")
        report.append(f"**Horizon:** {summary.get('horizon', 'N/A')} steps")
        report.append(f"**Repetitions:** {summary.get('n_reps', 'N/A')}")
        report.append(f"**Report Generated:** {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        report.append("")
        report.append("Optimal N minimizes the seed-averaged validation NRMSE; the NRMSE shown is on the test split.")
        report.append("")

        sizes = sorted({row['size'] for row in summary.get('rows', [])})
        for size in sizes:
            report.append(f"## N = {size}")
            report.append("")
            report.append(TABLE_HEADER)
            report.append(TABLE_RULE)
            for row in summary['rows']:
                if row['size'] == size:
                    report.append(self.format_row(row))
            best = summary.get('best_measure', {}).get(str(size))
            if best:
                report.append("")
                report.append(f"Largest error reduction: **{best}**")
            report.append("")

        failed = summary.get('failed_replicas', [])
        if failed:
            report.append("## Failed Replicas")
            report.append("")
            for item in failed:
                report.append(f"- N={item['size']} {item['measure']} seed={item['seed']}: {item['error']}")
            report.append("")

        return "\n".join(report)

    def _generate_json(self, summary: Dict[str, Any]) -> str:
        """Generate JSON format report"""
        return json.dumps(summary, indent=2, default=str)

    def save_report(self, report_content: str, output_path: Path, format: str = 'markdown') -> Path:
        """
        Save report to file

        Args:
            report_content: Formatted report content
            output_path: Path to save report
            format: Format of the report (determines file extension)
        """
        output_path = Path(output_path)

        if not output_path.suffix:
            output_path = output_path.with_suffix('.json' if format.lower() == 'json' else '.md')

        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(report_content)

        logger.info(f"Report saved to: {output_path}")
        return output_path
