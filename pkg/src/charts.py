"""Charts - rangos medios por método y previsiones frente a valores reales."""
from __future__ import annotations

import numpy as np
import pandas as pd
import plotly.graph_objects as go

PALETTE = ['#00D084', '#FF6B6B', '#4DA3FF', '#FFC857', '#B084F5', '#E0E0E0']


def _style(fig, title, color, height):
    fig.update_layout(title=dict(text=title, font=dict(size=16, color=color, family='Orbitron')),
        paper_bgcolor='rgba(0,0,0,0)', plot_bgcolor='rgba(0,0,0,0)', font=dict(color='#E0E0E0'),
        yaxis=dict(showgrid=True, gridcolor='rgba(0, 208, 132, 0.12)', zeroline=False),
        hovermode='x unified', margin=dict(l=40, r=40, t=40, b=40), height=height)
    return fig


def create_ranks_chart(ranks: pd.DataFrame, title="Rango medio por método"):
    """Barras horizontales agrupadas; `ranks` indexado por método con columnas rank_smape/rank_mase."""
    ranks = ranks.sort_values(ranks.columns[0], ascending=False)
    fig = go.Figure()
    for color, col in zip(PALETTE, ranks.columns):
        fig.add_trace(go.Bar(y=list(ranks.index), x=ranks[col].values, name=col, orientation='h',
            marker_color=color, marker_line=dict(color='#FFFFFF', width=1),
            hovertemplate='<b>%{y}</b><br>' + col + ': %{x:.3f}<extra></extra>'))
    fig = _style(fig, title, '#00D084', max(300, 28 * len(ranks)))
    fig.update_layout(barmode='group', bargap=0.3, xaxis=dict(showgrid=False, title='rango medio'),
        yaxis=dict(type='category', showgrid=False))
    return fig


def create_forecast_chart(series_id, train, actual, forecasts: dict, title=None):
    """Histórico + holdout real + previsión de cada estrategia para una serie."""
    train = np.asarray(train, dtype=float)
    actual = np.asarray(actual, dtype=float)
    future = np.arange(len(train), len(train) + len(actual))
    fig = go.Figure()
    fig.add_trace(go.Scatter(x=np.arange(len(train)), y=train, mode='lines', name='train',
        line=dict(color='#E0E0E0', width=1.5)))
    fig.add_trace(go.Scatter(x=future, y=actual, mode='lines+markers', name='real',
        line=dict(color='#00D084', width=2)))
    for color, (name, f) in zip(PALETTE[1:] * (len(forecasts) // 5 + 1), forecasts.items()):
        fig.add_trace(go.Scatter(x=future, y=np.asarray(f, dtype=float), mode='lines', name=name,
            line=dict(color=color, width=1.5, dash='dot')))
    return _style(fig, title or f"Previsión {series_id}", '#4DA3FF', 400)


def write_charts(figures: dict, out_dir) -> list:
    """Escribe cada figura como HTML autónomo; devuelve las rutas."""
    paths = []
    for filename, fig in figures.items():
        path = out_dir / filename
        fig.write_html(str(path), include_plotlyjs='cdn')
        paths.append(path)
    return paths
